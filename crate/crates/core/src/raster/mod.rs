//! Software rasterizer: composes a mockup bitmap and the replay state of its
//! controls into an RGB24 frame.

mod cursor;
pub mod font;

use std::io::Cursor;

use thiserror::Error;

use crate::model::{ControlKind, Mockup, Rect};
use crate::replay::{LiveState, ReplayState};

pub use cursor::{draw_cursor, CURSOR_HEIGHT, CURSOR_SPRITE, CURSOR_WIDTH};

pub type Rgb = [u8; 3];

pub const BLACK: Rgb = [0, 0, 0];
pub const WHITE: Rgb = [255, 255, 255];

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("canvas {canvas_w}x{canvas_h} is smaller than mockup {width}x{height}")]
    CanvasTooSmall { canvas_w: u32, canvas_h: u32, width: u32, height: u32 },
    #[error("mockup image is {actual_w}x{actual_h}, expected {width}x{height}")]
    ImageMismatch { width: u32, height: u32, actual_w: u32, actual_h: u32 },
    #[error("pixel buffer holds {len} bytes, expected {expected}")]
    BufferSize { len: usize, expected: usize },
    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),
}

/// Row-major RGB24 pixel buffer.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Frame").field("width", &self.width).field("height", &self.height).finish_non_exhaustive()
    }
}

impl Frame {
    /// A white frame.
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, WHITE)
    }

    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        let n = width as usize * height as usize;
        let mut pixels = Vec::with_capacity(n * 3);
        for _ in 0..n {
            pixels.extend_from_slice(&color);
        }
        Self { width, height, pixels }
    }

    pub fn from_rgb(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, RasterError> {
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(RasterError::BufferSize { len: pixels.len(), expected });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = self.offset(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    /// Writes a pixel; coordinates outside the frame are ignored.
    pub fn put(&mut self, x: i64, y: i64, color: Rgb) {
        if x >= 0 && y >= 0 && x < i64::from(self.width) && y < i64::from(self.height) {
            let i = self.offset(x as u32, y as u32);
            self.pixels[i..i + 3].copy_from_slice(&color);
        }
    }

    fn clip(&self, rect: Rect) -> Option<(u32, u32, u32, u32)> {
        let x0 = rect.x.min(self.width);
        let y0 = rect.y.min(self.height);
        let x1 = rect.right().min(u64::from(self.width)) as u32;
        let y1 = rect.bottom().min(u64::from(self.height)) as u32;
        (x0 < x1 && y0 < y1).then_some((x0, y0, x1, y1))
    }

    pub fn fill_rect(&mut self, rect: Rect, color: Rgb) {
        if let Some((x0, y0, x1, y1)) = self.clip(rect) {
            for y in y0..y1 {
                let start = self.offset(x0, y);
                let end = self.offset(x1, y);
                for px in self.pixels[start..end].chunks_exact_mut(3) {
                    px.copy_from_slice(&color);
                }
            }
        }
    }

    pub fn invert_rect(&mut self, rect: Rect) {
        if let Some((x0, y0, x1, y1)) = self.clip(rect) {
            for y in y0..y1 {
                let start = self.offset(x0, y);
                let end = self.offset(x1, y);
                for v in &mut self.pixels[start..end] {
                    *v = 255 - *v;
                }
            }
        }
    }

    /// Draws a border `thickness` pixels wide along the inside of `rect`.
    pub fn stroke_rect(&mut self, rect: Rect, thickness: u32, color: Rgb) {
        let t = thickness.min(rect.w).min(rect.h);
        if t == 0 {
            return;
        }
        self.fill_rect(Rect::new(rect.x, rect.y, rect.w, t), color);
        self.fill_rect(Rect::new(rect.x, (rect.bottom() - u64::from(t)) as u32, rect.w, t), color);
        self.fill_rect(Rect::new(rect.x, rect.y, t, rect.h), color);
        self.fill_rect(Rect::new((rect.right() - u64::from(t)) as u32, rect.y, t, rect.h), color);
    }

    /// One-pixel line between two points (inclusive), clipped to the frame.
    pub fn draw_line(&mut self, from: (i64, i64), to: (i64, i64), color: Rgb) {
        let (mut x, mut y) = from;
        let dx = (to.0 - x).abs();
        let dy = -(to.1 - y).abs();
        let sx = if x < to.0 { 1 } else { -1 };
        let sy = if y < to.1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.put(x, y, color);
            if (x, y) == to {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    /// Copies `src` with its top-left corner at `(dx, dy)`, clipped.
    pub fn blit(&mut self, src: &Frame, dx: u32, dy: u32) {
        let w = src.width.min(self.width.saturating_sub(dx));
        let h = src.height.min(self.height.saturating_sub(dy));
        for row in 0..h {
            let s = src.offset(0, row);
            let d = self.offset(dx, dy + row);
            let n = w as usize * 3;
            self.pixels[d..d + n].copy_from_slice(&src.pixels[s..s + n]);
        }
    }

    /// Lossless PNG encoding (8-bit RGB).
    pub fn encode_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let encoder = image::codecs::png::PngEncoder::new(&mut out);
        image::ImageEncoder::write_image(encoder, &self.pixels, self.width, self.height, image::ExtendedColorType::Rgb8)
            .expect("PNG encoding into memory cannot fail for a well-sized buffer");
        out
    }

    /// Decodes any supported raster format, flattening alpha onto white.
    pub fn decode(bytes: &[u8]) -> Result<Self, RasterError> {
        let img = image::ImageReader::new(Cursor::new(bytes)).with_guessed_format().map_err(image::ImageError::IoError)?.decode()?;
        let rgba = img.into_rgba8();
        let (width, height) = rgba.dimensions();
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for px in rgba.pixels() {
            let a = u32::from(px.0[3]);
            for c in &px.0[..3] {
                let v = (u32::from(*c) * a + 255 * (255 - a) + 127) / 255;
                pixels.push(v as u8);
            }
        }
        Ok(Self { width, height, pixels })
    }
}

/// Lays out `text` left to right at an 8-pixel advance, vertically centred in
/// `bbox`, in black. Glyph pixels outside `bbox` or the frame are clipped.
/// Codepoints outside printable ASCII draw as `?`.
pub fn draw_text(frame: &mut Frame, bbox: Rect, text: &str) {
    if bbox.w == 0 || bbox.h == 0 {
        return;
    }
    let top = i64::from(bbox.y) + (i64::from(bbox.h) - i64::from(font::GLYPH_SIZE)) / 2;
    let (left, right, bottom) = (i64::from(bbox.x), bbox.right() as i64, bbox.bottom() as i64);
    for (i, c) in text.chars().enumerate() {
        let gx = left + i as i64 * i64::from(font::GLYPH_SIZE);
        if gx >= right {
            break;
        }
        let rows = font::glyph(c);
        for row in 0..font::GLYPH_SIZE {
            let py = top + i64::from(row);
            if py < i64::from(bbox.y) || py >= bottom {
                continue;
            }
            for col in 0..font::GLYPH_SIZE {
                let px = gx + i64::from(col);
                if px < right && font::is_set(rows, col, row) {
                    frame.put(px, py, BLACK);
                }
            }
        }
    }
}

fn inset(rect: Rect, dx: u32, dy: u32) -> Rect {
    Rect::new(rect.x + dx, rect.y + dy, rect.w.saturating_sub(2 * dx), rect.h.saturating_sub(2 * dy))
}

/// Area inside a text input where its text is laid out.
pub fn text_area(bbox: Rect) -> Rect {
    inset(bbox, 2, 1)
}

/// Composes one frame: white canvas, mockup image at the top-left, control
/// overlays in declaration order, then the cursor.
pub fn render_frame(
    mockup: &Mockup,
    image: &Frame,
    state: &ReplayState,
    canvas_w: u32,
    canvas_h: u32,
) -> Result<Frame, RasterError> {
    if canvas_w < mockup.width_px || canvas_h < mockup.height_px {
        return Err(RasterError::CanvasTooSmall { canvas_w, canvas_h, width: mockup.width_px, height: mockup.height_px });
    }
    if (image.width, image.height) != (mockup.width_px, mockup.height_px) {
        return Err(RasterError::ImageMismatch {
            width: mockup.width_px,
            height: mockup.height_px,
            actual_w: image.width,
            actual_h: image.height,
        });
    }
    let mut frame = Frame::new(canvas_w, canvas_h);
    frame.blit(image, 0, 0);

    for control in &mockup.controls {
        let bbox = control.bbox;
        let live = state.control_states.get(&control.id);
        match control.kind {
            ControlKind::Button => {
                if state.shows_pressed(&control.id) {
                    frame.invert_rect(inset(bbox, 2, 2));
                }
                frame.stroke_rect(bbox, 2, BLACK);
            }
            ControlKind::TextInput => {
                frame.fill_rect(bbox, WHITE);
                frame.stroke_rect(bbox, 1, BLACK);
                let (text, focused) = match live {
                    Some(LiveState::TextInput { text, focused }) => (text.as_str(), *focused),
                    _ => ("", false),
                };
                let area = text_area(bbox);
                draw_text(&mut frame, area, text);
                if focused && area.w > 0 && area.h > 0 {
                    let advance = text.chars().count() as u64 * u64::from(font::GLYPH_SIZE);
                    let caret_x = (u64::from(area.x) + advance).min(area.right() - 1) as u32;
                    let top = i64::from(area.y) + (i64::from(area.h) - i64::from(font::GLYPH_SIZE)) / 2;
                    let y0 = top.max(i64::from(area.y));
                    let y1 = (top + i64::from(font::GLYPH_SIZE)).min(area.bottom() as i64);
                    for y in y0..y1 {
                        frame.put(i64::from(caret_x), y, BLACK);
                    }
                }
            }
            ControlKind::Checkbox => {
                frame.fill_rect(bbox, WHITE);
                frame.stroke_rect(bbox, 1, BLACK);
                let checked = matches!(live, Some(LiveState::Checkbox { checked: true }));
                if checked && bbox.w >= 5 && bbox.h >= 5 {
                    let (x0, y0) = (i64::from(bbox.x) + 2, i64::from(bbox.y) + 2);
                    let (x1, y1) = (bbox.right() as i64 - 3, bbox.bottom() as i64 - 3);
                    frame.draw_line((x0, y0), (x1, y1), BLACK);
                    frame.draw_line((x1, y0), (x0, y1), BLACK);
                }
            }
            ControlKind::Hotspot => {}
        }
    }

    if let Some(cursor) = state.cursor {
        draw_cursor(&mut frame, i64::from(cursor.x), i64::from(cursor.y));
    }
    Ok(frame)
}
