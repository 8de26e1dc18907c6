//! Seeded generators of random projects for property tests.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use mockrec_core::model::{
    ControlKind, ControlState, EntryId, EventPayload, EventSequence, InteractionEvent, Mockup, PointerSource, Project, Rect,
};
use mockrec_core::raster::Frame;
use mockrec_core::store::{save_project, AssetStore, StoreError};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size limits for generated projects.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_mockups: usize,
    pub max_controls: usize,
    pub max_scenarios: usize,
    pub max_entries: usize,
    pub max_events: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_mockups: 5, max_controls: 6, max_scenarios: 3, max_entries: 6, max_events: 50 }
    }
}

/// A project together with the images its mockups reference.
#[derive(Debug, Clone)]
pub struct Generated {
    pub project: Project,
    pub images: Vec<Frame>,
}

impl Generated {
    /// Stores the images and saves the project as `project.mrp` in `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, StoreError> {
        let path = dir.join("project.mrp");
        let assets = AssetStore::for_project(&path, &self.project);
        for image in &self.images {
            assets.store_frame(image)?;
        }
        save_project(&self.project, &path)?;
        Ok(path)
    }
}

const WORDS: &[&str] = &["cart", "login", "Grüße", "naïve", "menu", "a\"quote", "back\\slash", "tab\there", "line\nbreak", "日本", "ok"];

pub fn text(rng: &mut TestRng) -> String {
    let n = rng.gen_range(1..=3);
    (0..n).map(|_| *WORDS.choose(rng).expect("non-empty")).collect::<Vec<_>>().join(" ")
}

fn printable(rng: &mut TestRng) -> char {
    const EXTRA: &[char] = &['"', '\\', ' ', 'é', 'ß', '€', '漢', '😀'];
    if rng.gen_bool(0.8) {
        char::from(rng.gen_range(0x20u8..0x7f))
    } else {
        *EXTRA.choose(rng).expect("non-empty")
    }
}

fn image(rng: &mut TestRng) -> Frame {
    let (w, h) = (rng.gen_range(8..=64), rng.gen_range(8..=48));
    let mut frame = Frame::filled(w, h, [rng.gen(), rng.gen(), rng.gen()]);
    for _ in 0..rng.gen_range(0..4) {
        let x = rng.gen_range(0..w);
        let y = rng.gen_range(0..h);
        let rect = Rect::new(x, y, rng.gen_range(1..=w - x), rng.gen_range(1..=h - y));
        frame.fill_rect(rect, [rng.gen(), rng.gen(), rng.gen()]);
    }
    frame
}

fn rect_within(rng: &mut TestRng, w: u32, h: u32) -> Rect {
    let x = rng.gen_range(0..w);
    let y = rng.gen_range(0..h);
    Rect::new(x, y, rng.gen_range(1..=w - x), rng.gen_range(1..=h - y))
}

fn initial(rng: &mut TestRng, kind: ControlKind) -> ControlState {
    match kind {
        ControlKind::Button => ControlState::Button { pressed: rng.gen_bool(0.2) },
        ControlKind::Checkbox => ControlState::Checkbox { checked: rng.gen() },
        ControlKind::TextInput if rng.gen_bool(0.5) => ControlState::TextInput { text: text(rng) },
        kind => ControlState::default_for(kind),
    }
}

/// Events for `mockup`: positions inside it, non-decreasing timestamps with
/// occasional ties, a mix of pointer and keyboard input.
pub fn events(rng: &mut TestRng, mockup: &Mockup, count: usize) -> Vec<InteractionEvent> {
    let mut t = rng.gen_range(0..200u64);
    let mut out = Vec::with_capacity(count);
    let target = |rng: &mut TestRng| -> (u32, u32) {
        if !mockup.controls.is_empty() && rng.gen_bool(0.7) {
            let r = mockup.controls.choose(rng).expect("non-empty").bbox;
            (rng.gen_range(r.x..r.x + r.w), rng.gen_range(r.y..r.y + r.h))
        } else {
            (rng.gen_range(0..mockup.width_px), rng.gen_range(0..mockup.height_px))
        }
    };
    while out.len() < count {
        if rng.gen_bool(0.8) {
            t += rng.gen_range(0..400);
        }
        let source = if rng.gen_bool(0.8) { PointerSource::Mouse } else { PointerSource::Touch };
        let event = match rng.gen_range(0..10) {
            0..=2 => {
                let (x, y) = target(rng);
                InteractionEvent::pointer_move(t, x, y)
            }
            3..=5 => {
                let (x, y) = target(rng);
                out.push(InteractionEvent::new(t, EventPayload::PointerDown { x, y, source }));
                if out.len() == count {
                    break;
                }
                t += rng.gen_range(0..150);
                InteractionEvent::new(t, EventPayload::PointerUp { x, y, source })
            }
            6..=8 => InteractionEvent::key_char(t, printable(rng)),
            _ => InteractionEvent::key_backspace(t),
        };
        out.push(event);
    }
    out
}

/// A random valid project. Equal seeds produce equal projects.
pub fn project(rng: &mut TestRng, limits: &Limits) -> Generated {
    let mut project = Project::new();
    if rng.gen_bool(0.2) {
        project.asset_dir = "media/img".into();
    }
    let mut images = Vec::new();
    let mut catalog: HashMap<String, (u32, u32)> = HashMap::new();
    for _ in 0..rng.gen_range(1..=limits.max_mockups) {
        let img = image(rng);
        let image_ref = AssetStore::image_ref_for(&img);
        catalog.insert(image_ref.clone(), (img.width(), img.height()));
        let id = project.add_mockup(&text(rng), &image_ref, img.width(), img.height(), &catalog).expect("valid mockup");
        let mockup = project.mockup_mut(&id).expect("just added");
        for _ in 0..rng.gen_range(0..=limits.max_controls) {
            let kind = *ControlKind::ALL.choose(rng).expect("non-empty");
            let bbox = rect_within(rng, img.width(), img.height());
            let label = rng.gen_bool(0.5).then(|| text(rng));
            let state = initial(rng, kind);
            mockup.add_control(kind, bbox, state, label).expect("valid control");
        }
        images.push(img);
    }
    for _ in 0..rng.gen_range(0..=limits.max_scenarios) {
        let sid = project.add_scenario(&text(rng)).expect("valid scenario");
        for _ in 0..rng.gen_range(0..=limits.max_entries) {
            let mockup = project.mockups.choose(rng).expect("non-empty").clone();
            let eid = project.append_entry(&sid, &mockup.id).expect("valid entry");
            let n = rng.gen_range(0..=limits.max_events);
            let evs = events(rng, &mockup, n);
            project.entry_mut(&eid).expect("just added").record_events(evs).expect("monotone events");
        }
    }
    Generated { project, images }
}

/// A single-scenario project with at least two entries, for reordering tests.
pub fn scenario_project(rng: &mut TestRng, limits: &Limits) -> Generated {
    loop {
        let mut g = project(rng, limits);
        g.project.scenarios.retain(|s| s.entries.len() >= 2);
        if !g.project.scenarios.is_empty() {
            g.project.scenarios.truncate(1);
            return g;
        }
    }
}

/// A random legal move: an existing entry and a different target index.
pub fn legal_move(rng: &mut TestRng, entries: &[EntryId]) -> (EntryId, usize) {
    let from = rng.gen_range(0..entries.len());
    let mut to = rng.gen_range(0..entries.len() - 1);
    if to >= from {
        to += 1;
    }
    (entries[from].clone(), to)
}

/// Sequence helper used by tests that need a ready-made `EventSequence`.
pub fn sequence(rng: &mut TestRng, mockup: &Mockup, count: usize) -> EventSequence {
    EventSequence::from_events(events(rng, mockup, count)).expect("generated events are monotone")
}
