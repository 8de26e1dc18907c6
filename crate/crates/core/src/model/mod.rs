//! Projects, mockups, responsive controls, scenarios and their per-entry
//! event sequences, together with the edit operations that keep them valid.
//!
//! Values here are plain data. Edits go through methods that check their
//! preconditions and leave the value untouched when they fail.

mod event;
mod ids;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use event::{is_printable, EventPayload, EventSequence, InteractionEvent, PointerSource};
pub use ids::{is_valid_id, ControlId, EntryId, InvalidId, MockupId, ScenarioId, MAX_ID_LEN};
pub use validate::{validate_project, AssetCatalog, AssetProblem, Violation, ViolationReason};

/// Format version written by this build and the only one accepted on load.
pub const FORMAT_VERSION: u32 = 1;

/// Default asset folder, relative to the project file.
pub const DEFAULT_ASSET_DIR: &str = "assets";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("name must not be empty")]
    EmptyName,
    #[error("image {image_ref:?} is not available: {problem}")]
    MissingImage { image_ref: String, problem: AssetProblem },
    #[error("image {image_ref:?} is {actual_w}x{actual_h}, mockup declares {width_px}x{height_px}")]
    DimensionMismatch { image_ref: String, width_px: u32, height_px: u32, actual_w: u32, actual_h: u32 },
    #[error("mockup dimensions must be positive")]
    ZeroDimension,
    #[error("identifier {0:?} is already in use")]
    DuplicateId(String),
    #[error("bbox {bbox} does not fit in {width_px}x{height_px}")]
    BboxOutOfBounds { bbox: Rect, width_px: u32, height_px: u32 },
    #[error("initial state {state} is not valid for a {kind} control")]
    IncompatibleInitial { kind: ControlKind, state: &'static str },
    #[error("unknown mockup {0:?}")]
    UnknownMockup(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("unknown entry {0:?}")]
    UnknownEntry(String),
    #[error("entry id {0:?} occurs in more than one scenario")]
    AmbiguousEntry(String),
    #[error("index {index} out of range (must be below {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("timestamp {t_ms} at index {index} breaks ordering against neighbor at {neighbor_ms}")]
    NonMonotoneTimestamp { index: usize, t_ms: u64, neighbor_ms: u64 },
    #[error("key codepoint U+{codepoint:04X} is not printable")]
    NonPrintableKey { codepoint: u32 },
}

impl ModelError {
    /// Stable machine-readable code for API error bodies.
    pub fn reason_code(&self) -> &'static str {
        match self {
            ModelError::EmptyName => "empty_name",
            ModelError::MissingImage { .. } => "missing_asset",
            ModelError::DimensionMismatch { .. } => "dimension_mismatch",
            ModelError::ZeroDimension => "zero_dimension",
            ModelError::DuplicateId(_) => "duplicate_id",
            ModelError::BboxOutOfBounds { .. } => "bbox_out_of_bounds",
            ModelError::IncompatibleInitial { .. } => "incompatible_initial",
            ModelError::UnknownMockup(_) => "dangling_mockup_ref",
            ModelError::UnknownScenario(_) => "unknown_scenario",
            ModelError::UnknownEntry(_) => "unknown_entry",
            ModelError::AmbiguousEntry(_) => "ambiguous_entry",
            ModelError::IndexOutOfRange { .. } => "index_out_of_range",
            ModelError::NonMonotoneTimestamp { .. } => "non_monotone_timestamp",
            ModelError::NonPrintableKey { .. } => "non_printable_key_char",
        }
    }
}

/// Axis-aligned rectangle in mockup pixels. Contains `[x, x+w) x [y, y+h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> u64 {
        u64::from(self.x) + u64::from(self.w)
    }

    pub fn bottom(&self) -> u64 {
        u64::from(self.y) + u64::from(self.h)
    }

    pub fn contains(&self, px: u32, py: u32) -> bool {
        px >= self.x && u64::from(px) < self.right() && py >= self.y && u64::from(py) < self.bottom()
    }

    /// True when the rectangle is non-empty and lies inside `width x height`.
    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.w >= 1 && self.h >= 1 && self.right() <= u64::from(width) && self.bottom() <= u64::from(height)
    }
}

impl std::fmt::Display for Rect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.x, self.y, self.w, self.h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    Button,
    TextInput,
    Checkbox,
    Hotspot,
}

impl ControlKind {
    pub const ALL: [ControlKind; 4] =
        [ControlKind::Button, ControlKind::TextInput, ControlKind::Checkbox, ControlKind::Hotspot];

    pub fn as_str(self) -> &'static str {
        match self {
            ControlKind::Button => "button",
            ControlKind::TextInput => "text_input",
            ControlKind::Checkbox => "checkbox",
            ControlKind::Hotspot => "hotspot",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl std::fmt::Display for ControlKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stored initial state of a control. The variant must match the control kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlState {
    Button { pressed: bool },
    TextInput { text: String },
    Checkbox { checked: bool },
    Hotspot,
}

impl ControlState {
    pub fn kind(&self) -> ControlKind {
        match self {
            ControlState::Button { .. } => ControlKind::Button,
            ControlState::TextInput { .. } => ControlKind::TextInput,
            ControlState::Checkbox { .. } => ControlKind::Checkbox,
            ControlState::Hotspot => ControlKind::Hotspot,
        }
    }

    pub fn default_for(kind: ControlKind) -> Self {
        match kind {
            ControlKind::Button => ControlState::Button { pressed: false },
            ControlKind::TextInput => ControlState::TextInput { text: String::new() },
            ControlKind::Checkbox => ControlState::Checkbox { checked: false },
            ControlKind::Hotspot => ControlState::Hotspot,
        }
    }

    fn variant_name(&self) -> &'static str {
        self.kind().as_str()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub id: ControlId,
    pub kind: ControlKind,
    pub bbox: Rect,
    pub initial: ControlState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mockup {
    pub id: MockupId,
    pub name: String,
    /// Path of the raster image, relative to the project's asset folder.
    pub image_ref: String,
    pub width_px: u32,
    pub height_px: u32,
    /// Declaration order is z-order: later controls are on top.
    pub controls: Vec<Control>,
}

impl Mockup {
    pub fn control(&self, id: &ControlId) -> Option<&Control> {
        self.controls.iter().find(|c| &c.id == id)
    }

    pub fn add_control(
        &mut self,
        kind: ControlKind,
        bbox: Rect,
        initial: ControlState,
        label: Option<String>,
    ) -> Result<ControlId, ModelError> {
        if !bbox.fits_within(self.width_px, self.height_px) {
            return Err(ModelError::BboxOutOfBounds { bbox, width_px: self.width_px, height_px: self.height_px });
        }
        if initial.kind() != kind {
            return Err(ModelError::IncompatibleInitial { kind, state: initial.variant_name() });
        }
        let id = ControlId::fresh(self.controls.iter().map(|c| c.id.as_str()));
        if self.control(&id).is_some() {
            return Err(ModelError::DuplicateId(id.to_string()));
        }
        self.controls.push(Control { id: id.clone(), kind, bbox, initial, label });
        Ok(id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub id: EntryId,
    pub mockup_id: MockupId,
    pub sequence: EventSequence,
}

impl TimelineEntry {
    pub fn new(id: EntryId, mockup_id: MockupId) -> Self {
        Self { id, mockup_id, sequence: EventSequence::new() }
    }

    /// Appends an event captured after every event already stored.
    pub fn record_event(&mut self, event: InteractionEvent) -> Result<(), ModelError> {
        self.sequence.push(event)
    }

    /// Appends a batch, all or nothing.
    pub fn record_events(&mut self, events: impl IntoIterator<Item = InteractionEvent>) -> Result<(), ModelError> {
        let mut next = self.sequence.clone();
        for event in events {
            next.push(event)?;
        }
        self.sequence = next;
        Ok(())
    }

    /// Drops the whole sequence so that it can be recorded again.
    pub fn clear_sequence(&mut self) {
        self.sequence.clear();
    }

    /// Places a single new event among the existing ones.
    pub fn insert_event(&mut self, event: InteractionEvent, index: usize) -> Result<(), ModelError> {
        self.sequence.insert(event, index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub id: ScenarioId,
    pub name: String,
    pub entries: Vec<TimelineEntry>,
}

impl Scenario {
    pub fn entry(&self, id: &EntryId) -> Option<&TimelineEntry> {
        self.entries.iter().find(|e| &e.id == id)
    }

    pub fn entry_mut(&mut self, id: &EntryId) -> Option<&mut TimelineEntry> {
        self.entries.iter_mut().find(|e| &e.id == id)
    }

    pub fn entry_index(&self, id: &EntryId) -> Option<usize> {
        self.entries.iter().position(|e| &e.id == id)
    }

    /// Relocates an entry; every sequence travels with its entry unchanged.
    pub fn move_entry(&mut self, id: &EntryId, new_index: usize) -> Result<(), ModelError> {
        let from = self.entry_index(id).ok_or_else(|| ModelError::UnknownEntry(id.to_string()))?;
        if new_index >= self.entries.len() {
            return Err(ModelError::IndexOutOfRange { index: new_index, len: self.entries.len() });
        }
        let entry = self.entries.remove(from);
        self.entries.insert(new_index, entry);
        Ok(())
    }

    /// Reorders entries to match `order`, which must be a permutation of the
    /// current entry ids.
    pub fn reorder(&mut self, order: &[EntryId]) -> Result<(), ModelError> {
        if order.len() != self.entries.len() {
            return Err(ModelError::IndexOutOfRange { index: order.len(), len: self.entries.len() });
        }
        let mut remaining: Vec<Option<TimelineEntry>> = self.entries.iter().cloned().map(Some).collect();
        let mut next = Vec::with_capacity(order.len());
        for id in order {
            let slot = self
                .entries
                .iter()
                .position(|e| &e.id == id)
                .and_then(|i| remaining[i].take())
                .ok_or_else(|| ModelError::UnknownEntry(id.to_string()))?;
            next.push(slot);
        }
        self.entries = next;
        Ok(())
    }

    pub fn delete_entry(&mut self, id: &EntryId) -> Result<TimelineEntry, ModelError> {
        let index = self.entry_index(id).ok_or_else(|| ModelError::UnknownEntry(id.to_string()))?;
        Ok(self.entries.remove(index))
    }
}

/// The whole prototyping artifact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Project {
    pub format_version: u32,
    pub mockups: Vec<Mockup>,
    pub scenarios: Vec<Scenario>,
    pub asset_dir: String,
}

impl Default for Project {
    fn default() -> Self {
        Self::new()
    }
}

impl Project {
    pub fn new() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            mockups: Vec::new(),
            scenarios: Vec::new(),
            asset_dir: DEFAULT_ASSET_DIR.to_string(),
        }
    }

    pub fn mockup(&self, id: &MockupId) -> Option<&Mockup> {
        self.mockups.iter().find(|m| &m.id == id)
    }

    pub fn mockup_mut(&mut self, id: &MockupId) -> Result<&mut Mockup, ModelError> {
        self.mockups
            .iter_mut()
            .find(|m| &m.id == id)
            .ok_or_else(|| ModelError::UnknownMockup(id.to_string()))
    }

    pub fn scenario(&self, id: &ScenarioId) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| &s.id == id)
    }

    pub fn scenario_mut(&mut self, id: &ScenarioId) -> Result<&mut Scenario, ModelError> {
        self.scenarios
            .iter_mut()
            .find(|s| &s.id == id)
            .ok_or_else(|| ModelError::UnknownScenario(id.to_string()))
    }

    /// Adds a mockup for an image already present in the asset catalog.
    pub fn add_mockup(
        &mut self,
        name: &str,
        image_ref: &str,
        width_px: u32,
        height_px: u32,
        assets: &dyn AssetCatalog,
    ) -> Result<MockupId, ModelError> {
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        if width_px == 0 || height_px == 0 {
            return Err(ModelError::ZeroDimension);
        }
        let (actual_w, actual_h) = assets
            .image_dimensions(image_ref)
            .map_err(|problem| ModelError::MissingImage { image_ref: image_ref.to_string(), problem })?;
        if (actual_w, actual_h) != (width_px, height_px) {
            return Err(ModelError::DimensionMismatch {
                image_ref: image_ref.to_string(),
                width_px,
                height_px,
                actual_w,
                actual_h,
            });
        }
        let id = MockupId::fresh(self.mockups.iter().map(|m| m.id.as_str()));
        if self.mockup(&id).is_some() {
            return Err(ModelError::DuplicateId(id.to_string()));
        }
        self.mockups.push(Mockup {
            id: id.clone(),
            name: name.to_string(),
            image_ref: image_ref.to_string(),
            width_px,
            height_px,
            controls: Vec::new(),
        });
        Ok(id)
    }

    pub fn add_scenario(&mut self, name: &str) -> Result<ScenarioId, ModelError> {
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        let id = ScenarioId::fresh(self.scenarios.iter().map(|s| s.id.as_str()));
        self.scenarios.push(Scenario { id: id.clone(), name: name.to_string(), entries: Vec::new() });
        Ok(id)
    }

    /// Appends a new entry with an empty sequence to the end of a scenario.
    pub fn append_entry(&mut self, scenario_id: &ScenarioId, mockup_id: &MockupId) -> Result<EntryId, ModelError> {
        if self.mockup(mockup_id).is_none() {
            return Err(ModelError::UnknownMockup(mockup_id.to_string()));
        }
        let id = EntryId::fresh(self.scenarios.iter().flat_map(|s| s.entries.iter().map(|e| e.id.as_str())));
        let scenario = self.scenario_mut(scenario_id)?;
        if scenario.entry(&id).is_some() {
            return Err(ModelError::DuplicateId(id.to_string()));
        }
        scenario.entries.push(TimelineEntry::new(id.clone(), mockup_id.clone()));
        Ok(id)
    }

    /// Locates an entry by id across all scenarios as `(scenario, entry)` indices.
    pub fn locate_entry(&self, id: &EntryId) -> Result<(usize, usize), ModelError> {
        let mut found = None;
        for (si, scenario) in self.scenarios.iter().enumerate() {
            if let Some(ei) = scenario.entry_index(id) {
                if found.is_some() {
                    return Err(ModelError::AmbiguousEntry(id.to_string()));
                }
                found = Some((si, ei));
            }
        }
        found.ok_or_else(|| ModelError::UnknownEntry(id.to_string()))
    }

    pub fn entry_mut(&mut self, id: &EntryId) -> Result<&mut TimelineEntry, ModelError> {
        let (si, ei) = self.locate_entry(id)?;
        Ok(&mut self.scenarios[si].entries[ei])
    }

    pub fn entry(&self, id: &EntryId) -> Result<&TimelineEntry, ModelError> {
        let (si, ei) = self.locate_entry(id)?;
        Ok(&self.scenarios[si].entries[ei])
    }

    /// Mockup shown by an entry, if the reference resolves.
    pub fn entry_mockup(&self, entry: &TimelineEntry) -> Option<&Mockup> {
        self.mockup(&entry.mockup_id)
    }
}
