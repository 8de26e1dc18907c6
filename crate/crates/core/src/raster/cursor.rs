use super::{Frame, BLACK, WHITE};

pub const CURSOR_WIDTH: usize = 8;
pub const CURSOR_HEIGHT: usize = 12;

/// Arrow pointer, tip at the top-left. `X` ink, `o` fill, space transparent.
pub const CURSOR_SPRITE: [&str; CURSOR_HEIGHT] = [
    "X       ",
    "XX      ",
    "XoX     ",
    "XooX    ",
    "XoooX   ",
    "XooooX  ",
    "XoooooX ",
    "XooooooX",
    "XoooXXXX",
    "XooX    ",
    "XoX     ",
    "XX      ",
];

/// Composites the cursor with its tip at `(x, y)`; parts outside the frame
/// are clipped.
pub fn draw_cursor(frame: &mut Frame, x: i64, y: i64) {
    for (row, line) in CURSOR_SPRITE.iter().enumerate() {
        for (col, cell) in line.bytes().enumerate() {
            let color = match cell {
                b'X' => BLACK,
                b'o' => WHITE,
                _ => continue,
            };
            frame.put(x + col as i64, y + row as i64, color);
        }
    }
}
