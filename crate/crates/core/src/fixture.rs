//! Synthetic web-store project: eleven drawn checkout screens, one scripted
//! purchase scenario and a numbered textual walkthrough of it.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{ControlKind, ControlState, InteractionEvent, MockupId, Project, Rect, ScenarioId};
use crate::raster::{draw_text, Frame, BLACK};
use crate::store::{save_project, write_atomic, AssetStore, StoreError};

pub const FIXTURE_WIDTH: u32 = 320;
pub const FIXTURE_HEIGHT: u32 = 240;
pub const PROJECT_FILE: &str = "webstore.mrp";
pub const STEPS_FILE: &str = "steps.txt";

const PAPER: [u8; 3] = [250, 248, 240];
const INK: [u8; 3] = [70, 70, 80];
const BAR: [u8; 3] = [200, 214, 232];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{0} exists and is not empty")]
    NotEmpty(PathBuf),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub text: String,
    pub mockup_id: MockupId,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub project: Project,
    pub scenario_id: ScenarioId,
    /// Mockup images in mockup order.
    pub images: Vec<Frame>,
    pub steps: Vec<Step>,
}

impl Fixture {
    /// Steps file contents: one `N. text -> mockup_id` line per step.
    pub fn steps_text(&self) -> String {
        self.steps.iter().enumerate().map(|(i, s)| format!("{}. {} -> {}\n", i + 1, s.text, s.mockup_id)).collect()
    }
}

enum Widget {
    Button(&'static str),
    Input(&'static str),
    Check(&'static str),
    Hotspot(&'static str),
}

struct Screen {
    name: &'static str,
    title: &'static str,
    notes: &'static [&'static str],
    widgets: &'static [(Widget, Rect)],
}

const SCREENS: [Screen; 11] = [
    Screen {
        name: "home",
        title: "SHOP - Home",
        notes: &["Spring sale: 20% off"],
        widgets: &[
            (Widget::Input("search"), Rect::new(20, 60, 200, 20)),
            (Widget::Button("Search"), Rect::new(230, 60, 70, 20)),
            (Widget::Hotspot("Featured: trail backpack"), Rect::new(20, 110, 280, 90)),
        ],
    },
    Screen {
        name: "search results",
        title: "SHOP - Results",
        notes: &["3 results for backpack"],
        widgets: &[
            (Widget::Hotspot("Day pack 20l      39.90"), Rect::new(20, 70, 280, 40)),
            (Widget::Hotspot("Trail pack 30l    59.90"), Rect::new(20, 120, 280, 40)),
            (Widget::Hotspot("Expedition 60l   129.00"), Rect::new(20, 170, 280, 40)),
        ],
    },
    Screen {
        name: "product detail",
        title: "SHOP - Trail pack 30l",
        notes: &["59.90 EUR", "In stock"],
        widgets: &[
            (Widget::Input("qty"), Rect::new(180, 110, 40, 20)),
            (Widget::Button("Add to cart"), Rect::new(180, 150, 120, 24)),
        ],
    },
    Screen {
        name: "cart",
        title: "SHOP - Cart",
        notes: &["2 x Trail pack 30l", "Total 119.80 EUR"],
        widgets: &[
            (Widget::Hotspot("Continue shopping"), Rect::new(20, 190, 150, 24)),
            (Widget::Button("Checkout"), Rect::new(200, 190, 100, 24)),
        ],
    },
    Screen {
        name: "login",
        title: "SHOP - Sign in",
        notes: &["Returning customer"],
        widgets: &[
            (Widget::Input("e-mail"), Rect::new(20, 80, 280, 20)),
            (Widget::Input("password"), Rect::new(20, 130, 280, 20)),
            (Widget::Button("Sign in"), Rect::new(200, 180, 100, 24)),
        ],
    },
    Screen {
        name: "address",
        title: "CHECKOUT 1/5 Address",
        notes: &[],
        widgets: &[
            (Widget::Input("name"), Rect::new(20, 60, 280, 20)),
            (Widget::Input("street"), Rect::new(20, 105, 280, 20)),
            (Widget::Input("city"), Rect::new(20, 150, 280, 20)),
            (Widget::Button("Continue"), Rect::new(200, 195, 100, 24)),
        ],
    },
    Screen {
        name: "delivery options",
        title: "CHECKOUT 2/5 Delivery",
        notes: &[],
        widgets: &[
            (Widget::Check("Standard 3-5 days  free"), Rect::new(20, 60, 14, 14)),
            (Widget::Check("Express next day  9.90"), Rect::new(20, 95, 14, 14)),
            (Widget::Check("Pickup in store   free"), Rect::new(20, 130, 14, 14)),
            (Widget::Button("Continue"), Rect::new(200, 195, 100, 24)),
        ],
    },
    Screen {
        name: "payment method",
        title: "CHECKOUT 3/5 Payment",
        notes: &[],
        widgets: &[
            (Widget::Check("Credit card"), Rect::new(20, 60, 14, 14)),
            (Widget::Check("PayPal"), Rect::new(20, 95, 14, 14)),
            (Widget::Check("Invoice"), Rect::new(20, 130, 14, 14)),
            (Widget::Button("Continue"), Rect::new(200, 195, 100, 24)),
        ],
    },
    Screen {
        name: "payment details",
        title: "CHECKOUT 4/5 Card",
        notes: &[],
        widgets: &[
            (Widget::Input("card number"), Rect::new(20, 70, 280, 20)),
            (Widget::Input("expiry"), Rect::new(20, 125, 80, 20)),
            (Widget::Button("Continue"), Rect::new(200, 195, 100, 24)),
        ],
    },
    Screen {
        name: "order summary",
        title: "CHECKOUT 5/5 Summary",
        notes: &["2 x Trail pack 30l  119.80", "Express delivery      9.90", "Total               129.70"],
        widgets: &[
            (Widget::Check("I accept the terms"), Rect::new(20, 160, 14, 14)),
            (Widget::Button("Place order"), Rect::new(180, 195, 120, 24)),
        ],
    },
    Screen {
        name: "confirmation",
        title: "SHOP - Thank you",
        notes: &["Order 10422 confirmed", "Arrives tomorrow"],
        widgets: &[(Widget::Button("Back to shop"), Rect::new(100, 180, 120, 24))],
    },
];

fn draw_screen(screen: &Screen) -> Frame {
    let mut f = Frame::filled(FIXTURE_WIDTH, FIXTURE_HEIGHT, PAPER);
    f.fill_rect(Rect::new(0, 0, FIXTURE_WIDTH, 24), BAR);
    draw_text(&mut f, Rect::new(8, 0, FIXTURE_WIDTH - 16, 24), screen.title);
    f.stroke_rect(Rect::new(0, 0, FIXTURE_WIDTH, FIXTURE_HEIGHT), 1, INK);
    let mut note_y = 30;
    for note in screen.notes {
        draw_text(&mut f, Rect::new(20, note_y, 280, 12), note);
        note_y += 12;
    }
    for (widget, bbox) in screen.widgets {
        match widget {
            Widget::Button(label) => {
                let w = (label.len() as u32 * 8).min(bbox.w);
                draw_text(&mut f, Rect::new(bbox.x + (bbox.w - w) / 2, bbox.y, w, bbox.h), label);
            }
            Widget::Input(caption) => draw_text(&mut f, Rect::new(bbox.x, bbox.y - 12, bbox.w.max(100), 10), caption),
            Widget::Check(caption) => draw_text(&mut f, Rect::new(bbox.x + bbox.w + 8, bbox.y, 250, bbox.h), caption),
            Widget::Hotspot(caption) => {
                f.stroke_rect(*bbox, 1, INK);
                draw_text(&mut f, Rect::new(bbox.x + 6, bbox.y, bbox.w - 6, bbox.h), caption);
            }
        }
    }
    f.fill_rect(Rect::new(FIXTURE_WIDTH - 14, 6, 8, 2), BLACK);
    f
}

/// Scripted interaction on one mockup.
struct Script {
    t: u64,
    events: Vec<InteractionEvent>,
}

impl Script {
    fn new() -> Self {
        Self { t: 0, events: Vec::new() }
    }

    fn centre(r: Rect) -> (u32, u32) {
        (r.x + r.w / 2, r.y + r.h / 2)
    }

    fn glide(mut self, to: Rect) -> Self {
        let (x, y) = Self::centre(to);
        self.t += 200;
        self.events.push(InteractionEvent::pointer_move(self.t, x, y));
        self
    }

    fn click(mut self, on: Rect) -> Self {
        self = self.glide(on);
        let (x, y) = Self::centre(on);
        self.t += 250;
        self.events.push(InteractionEvent::pointer_down(self.t, x, y));
        self.t += 90;
        self.events.push(InteractionEvent::pointer_up(self.t, x, y));
        self
    }

    fn type_text(mut self, text: &str) -> Self {
        for c in text.chars() {
            self.t += 110;
            self.events.push(InteractionEvent::key_char(self.t, c));
        }
        self
    }

    fn backspace(mut self) -> Self {
        self.t += 150;
        self.events.push(InteractionEvent::key_backspace(self.t));
        self
    }
}

fn w(screen: usize, widget: usize) -> Rect {
    SCREENS[screen].widgets[widget].1
}

fn scripts() -> [Script; 11] {
    [
        Script::new().click(w(0, 0)).type_text("backpak").backspace().backspace().type_text("ck").click(w(0, 1)),
        Script::new().glide(w(1, 0)).click(w(1, 1)),
        Script::new().click(w(2, 0)).type_text("2").click(w(2, 1)),
        Script::new().glide(w(3, 0)).click(w(3, 1)),
        Script::new().click(w(4, 0)).type_text("ann@example.org").click(w(4, 1)).type_text("********").click(w(4, 2)),
        Script::new()
            .click(w(5, 0))
            .type_text("Ann Smith")
            .click(w(5, 1))
            .type_text("1 Main St")
            .click(w(5, 2))
            .type_text("Springfield")
            .click(w(5, 3)),
        Script::new().glide(w(6, 0)).click(w(6, 1)).click(w(6, 3)),
        Script::new().click(w(7, 0)).click(w(7, 3)),
        Script::new().click(w(8, 0)).type_text("4111 1111 1111 1111").click(w(8, 1)).type_text("09/29").click(w(8, 2)),
        Script::new().click(w(9, 0)).click(w(9, 1)),
        Script::new().glide(w(10, 0)),
    ]
}

const STEPS: [(&str, usize); 19] = [
    ("The customer opens the web store home page.", 0),
    ("The customer types \"backpack\" into the search field.", 0),
    ("The customer starts the search.", 0),
    ("The customer opens the 30 litre trail pack from the results.", 1),
    ("The customer sets the quantity to 2.", 2),
    ("The customer adds the product to the cart.", 2),
    ("The customer checks the cart and proceeds to checkout.", 3),
    ("The customer enters the e-mail address.", 4),
    ("The customer enters the password and signs in.", 4),
    ("The customer enters the recipient name.", 5),
    ("The customer enters street and city.", 5),
    ("The customer confirms the delivery address.", 5),
    ("The customer chooses express delivery and continues.", 6),
    ("The customer selects credit card payment and continues.", 7),
    ("The customer enters card number and expiry date.", 8),
    ("The customer confirms the payment details.", 8),
    ("The customer accepts the terms and conditions.", 9),
    ("The customer places the order.", 9),
    ("The system shows the order confirmation.", 10),
];

/// Builds the fixture in memory. The result is identical on every call.
pub fn webstore() -> Fixture {
    let mut project = Project::new();
    let images: Vec<Frame> = SCREENS.iter().map(draw_screen).collect();
    let catalog: HashMap<String, (u32, u32)> =
        images.iter().map(|f| (AssetStore::image_ref_for(f), (f.width(), f.height()))).collect();
    let mut mockup_ids = Vec::new();
    for (screen, image) in SCREENS.iter().zip(&images) {
        let id = project
            .add_mockup(screen.name, &AssetStore::image_ref_for(image), image.width(), image.height(), &catalog)
            .expect("fixture mockup");
        let mockup = project.mockup_mut(&id).expect("just added");
        for (widget, bbox) in screen.widgets {
            let (kind, label) = match widget {
                Widget::Button(l) => (ControlKind::Button, l),
                Widget::Input(l) => (ControlKind::TextInput, l),
                Widget::Check(l) => (ControlKind::Checkbox, l),
                Widget::Hotspot(l) => (ControlKind::Hotspot, l),
            };
            mockup.add_control(kind, *bbox, ControlState::default_for(kind), Some(label.to_string())).expect("fixture control");
        }
        mockup_ids.push(id);
    }
    let scenario_id = project.add_scenario("buy a product in the web store").expect("fixture scenario");
    for (mockup_id, script) in mockup_ids.iter().zip(scripts()) {
        let entry = project.append_entry(&scenario_id, mockup_id).expect("fixture entry");
        project.entry_mut(&entry).expect("just added").record_events(script.events).expect("fixture events");
    }
    let steps = STEPS.iter().map(|&(text, m)| Step { text: text.to_string(), mockup_id: mockup_ids[m].clone() }).collect();
    Fixture { project, scenario_id, images, steps }
}

/// Writes the fixture into `out_dir`, which must be missing or empty.
/// Returns the path of the project document.
pub fn write_webstore(out_dir: &Path) -> Result<PathBuf, FixtureError> {
    if out_dir.exists() {
        let empty = out_dir.is_dir()
            && fs::read_dir(out_dir).map_err(|e| StoreError::Io { path: out_dir.to_path_buf(), source: e })?.next().is_none();
        if !empty {
            return Err(FixtureError::NotEmpty(out_dir.to_path_buf()));
        }
    }
    fs::create_dir_all(out_dir).map_err(|e| StoreError::Io { path: out_dir.to_path_buf(), source: e })?;
    let fixture = webstore();
    let path = out_dir.join(PROJECT_FILE);
    let assets = AssetStore::for_project(&path, &fixture.project);
    for image in &fixture.images {
        assets.store_frame(image)?;
    }
    save_project(&fixture.project, &path)?;
    write_atomic(&out_dir.join(STEPS_FILE), fixture.steps_text().as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replay::{scenario_timeline, unfocused_key_events, ReplayConfig};

    #[test]
    fn shape() {
        let f = webstore();
        assert_eq!(f.project.mockups.len(), 11);
        assert_eq!(f.project.scenarios.len(), 1);
        assert_eq!(f.project.scenarios[0].entries.len(), 11);
        assert_eq!(f.steps.len(), 19);
        assert_eq!(f.steps_text().lines().count(), 19);
        for m in &f.project.mockups {
            assert!(f.steps.iter().any(|s| s.mockup_id == m.id), "{} has no step", m.id);
        }
    }

    #[test]
    fn every_keystroke_lands_in_a_field() {
        let f = webstore();
        for entry in &f.project.scenarios[0].entries {
            let mockup = f.project.entry_mockup(entry).unwrap();
            assert_eq!(unfocused_key_events(mockup, &entry.sequence), 0, "{}", entry.id);
        }
    }

    #[test]
    fn deterministic_and_reasonably_long() {
        let a = webstore();
        let b = webstore();
        assert_eq!(a.project, b.project);
        assert_eq!(a.images, b.images);
        let s = &a.project.scenarios[0];
        let total = scenario_timeline(&a.project, s, &ReplayConfig::default()).unwrap().total_ms;
        assert!((5_000..60_000).contains(&total), "{total}");
    }

    #[test]
    fn refuses_non_empty_dir() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("x"), b"").unwrap();
        assert!(matches!(write_webstore(dir.path()), Err(FixtureError::NotEmpty(_))));
        let out = dir.path().join("fresh");
        let path = write_webstore(&out).unwrap();
        assert!(crate::store::load_project(&path).is_ok());
    }
}
