use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{is_printable, EventPayload, Mockup, Project, FORMAT_VERSION};

/// Why an image could not be resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssetProblem {
    Missing,
    Undecodable(String),
}

impl fmt::Display for AssetProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssetProblem::Missing => f.write_str("file not found"),
            AssetProblem::Undecodable(msg) => write!(f, "cannot decode image: {msg}"),
        }
    }
}

/// Resolves image references to pixel dimensions.
pub trait AssetCatalog {
    fn image_dimensions(&self, image_ref: &str) -> Result<(u32, u32), AssetProblem>;
}

impl AssetCatalog for HashMap<String, (u32, u32)> {
    fn image_dimensions(&self, image_ref: &str) -> Result<(u32, u32), AssetProblem> {
        self.get(image_ref).copied().ok_or(AssetProblem::Missing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationReason {
    UnsupportedFormatVersion,
    InvalidAssetDir,
    DuplicateMockupId,
    DuplicateControlId,
    DuplicateScenarioId,
    DuplicateEntryId,
    EmptyName,
    ZeroDimension,
    InvalidImageRef,
    MissingAsset,
    UndecodableAsset,
    DimensionMismatch,
    BboxOutOfBounds,
    IncompatibleInitial,
    DanglingMockupRef,
    NonMonotoneTimestamp,
    EventOutOfBounds,
    NonPrintableKeyChar,
}

impl ViolationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationReason::UnsupportedFormatVersion => "unsupported_format_version",
            ViolationReason::InvalidAssetDir => "invalid_asset_dir",
            ViolationReason::DuplicateMockupId => "duplicate_mockup_id",
            ViolationReason::DuplicateControlId => "duplicate_control_id",
            ViolationReason::DuplicateScenarioId => "duplicate_scenario_id",
            ViolationReason::DuplicateEntryId => "duplicate_entry_id",
            ViolationReason::EmptyName => "empty_name",
            ViolationReason::ZeroDimension => "zero_dimension",
            ViolationReason::InvalidImageRef => "invalid_image_ref",
            ViolationReason::MissingAsset => "missing_asset",
            ViolationReason::UndecodableAsset => "undecodable_asset",
            ViolationReason::DimensionMismatch => "dimension_mismatch",
            ViolationReason::BboxOutOfBounds => "bbox_out_of_bounds",
            ViolationReason::IncompatibleInitial => "incompatible_initial",
            ViolationReason::DanglingMockupRef => "dangling_mockup_ref",
            ViolationReason::NonMonotoneTimestamp => "non_monotone_timestamp",
            ViolationReason::EventOutOfBounds => "event_out_of_bounds",
            ViolationReason::NonPrintableKeyChar => "non_printable_key_char",
        }
    }
}

impl fmt::Display for ViolationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One broken invariant, located by a slash-separated path such as
/// `scenarios/s01/entries/e03/events/4`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub reason: ViolationReason,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.path, self.reason, self.message)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, path: impl Into<String>, reason: ViolationReason, message: impl Into<String>) {
        self.0.push(Violation { path: path.into(), reason, message: message.into() });
    }
}

fn is_safe_relative(path: &str) -> bool {
    !path.is_empty()
        && !path.starts_with('/')
        && !path.contains('\\')
        && path.split('/').all(|part| !part.is_empty() && part != "." && part != "..")
}

/// Checks every project invariant. Returns an empty list iff the project is
/// valid. The result depends only on the project and the catalog answers.
pub fn validate_project(project: &Project, assets: &dyn AssetCatalog) -> Vec<Violation> {
    let mut report = Report(Vec::new());

    if project.format_version != FORMAT_VERSION {
        report.push(
            "format_version",
            ViolationReason::UnsupportedFormatVersion,
            format!("version {} is not supported (expected {FORMAT_VERSION})", project.format_version),
        );
    }
    if !is_safe_relative(&project.asset_dir) {
        report.push("asset_dir", ViolationReason::InvalidAssetDir, format!("{:?} is not a plain relative path", project.asset_dir));
    }

    let mut seen = HashSet::new();
    for mockup in &project.mockups {
        let path = format!("mockups/{}", mockup.id);
        if !seen.insert(&mockup.id) {
            report.push(&path, ViolationReason::DuplicateMockupId, format!("mockup id {} declared twice", mockup.id));
        }
        validate_mockup(mockup, &path, assets, &mut report);
    }

    let mut seen = HashSet::new();
    for scenario in &project.scenarios {
        let spath = format!("scenarios/{}", scenario.id);
        if !seen.insert(&scenario.id) {
            report.push(&spath, ViolationReason::DuplicateScenarioId, format!("scenario id {} declared twice", scenario.id));
        }
        if scenario.name.is_empty() {
            report.push(&spath, ViolationReason::EmptyName, "scenario name is empty");
        }
        let mut entry_ids = HashSet::new();
        for entry in &scenario.entries {
            let epath = format!("{spath}/entries/{}", entry.id);
            if !entry_ids.insert(&entry.id) {
                report.push(&epath, ViolationReason::DuplicateEntryId, format!("entry id {} used twice", entry.id));
            }
            let mockup = project.mockup(&entry.mockup_id);
            if mockup.is_none() {
                report.push(&epath, ViolationReason::DanglingMockupRef, format!("mockup {} does not exist", entry.mockup_id));
            }
            let mut prev_t = 0;
            for (i, event) in entry.sequence.iter().enumerate() {
                let vpath = format!("{epath}/events/{i}");
                if event.t_ms < prev_t {
                    report.push(
                        &vpath,
                        ViolationReason::NonMonotoneTimestamp,
                        format!("t_ms {} is earlier than the previous {}", event.t_ms, prev_t),
                    );
                }
                prev_t = prev_t.max(event.t_ms);
                if let (Some(m), Some((x, y))) = (mockup, event.position()) {
                    if x >= m.width_px || y >= m.height_px {
                        report.push(
                            &vpath,
                            ViolationReason::EventOutOfBounds,
                            format!("({x},{y}) is outside {}x{}", m.width_px, m.height_px),
                        );
                    }
                }
                if let EventPayload::KeyChar { char } = event.payload {
                    if !is_printable(char) {
                        report.push(
                            &vpath,
                            ViolationReason::NonPrintableKeyChar,
                            format!("U+{:04X} is a control character", char as u32),
                        );
                    }
                }
            }
        }
    }
    report.0
}

fn validate_mockup(mockup: &Mockup, path: &str, assets: &dyn AssetCatalog, report: &mut Report) {
    if mockup.name.is_empty() {
        report.push(path, ViolationReason::EmptyName, "mockup name is empty");
    }
    if mockup.width_px == 0 || mockup.height_px == 0 {
        report.push(path, ViolationReason::ZeroDimension, "mockup width and height must be positive");
    }
    if !is_safe_relative(&mockup.image_ref) {
        report.push(path, ViolationReason::InvalidImageRef, format!("{:?} is not a plain relative path", mockup.image_ref));
    } else {
        match assets.image_dimensions(&mockup.image_ref) {
            Ok((w, h)) if (w, h) != (mockup.width_px, mockup.height_px) => report.push(
                path,
                ViolationReason::DimensionMismatch,
                format!("image is {w}x{h}, mockup declares {}x{}", mockup.width_px, mockup.height_px),
            ),
            Ok(_) => {}
            Err(AssetProblem::Missing) => {
                report.push(path, ViolationReason::MissingAsset, format!("image {} not found", mockup.image_ref))
            }
            Err(AssetProblem::Undecodable(msg)) => report.push(
                path,
                ViolationReason::UndecodableAsset,
                format!("image {} cannot be decoded: {msg}", mockup.image_ref),
            ),
        }
    }

    let mut seen = HashSet::new();
    for control in &mockup.controls {
        let cpath = format!("{path}/controls/{}", control.id);
        if !seen.insert(&control.id) {
            report.push(&cpath, ViolationReason::DuplicateControlId, format!("control id {} declared twice", control.id));
        }
        if !control.bbox.fits_within(mockup.width_px, mockup.height_px) {
            report.push(
                &cpath,
                ViolationReason::BboxOutOfBounds,
                format!("bbox {} does not fit in {}x{}", control.bbox, mockup.width_px, mockup.height_px),
            );
        }
        if control.initial.kind() != control.kind {
            report.push(
                &cpath,
                ViolationReason::IncompatibleInitial,
                format!("{} initial state on a {} control", control.initial.kind(), control.kind),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Control, ControlId, ControlKind, ControlState, InteractionEvent, MockupId, Rect};

    fn assets() -> HashMap<String, (u32, u32)> {
        [("a.png".to_string(), (800, 600))].into_iter().collect()
    }

    fn clean() -> Project {
        let mut p = Project::new();
        let m = p.add_mockup("home", "a.png", 800, 600, &assets()).unwrap();
        p.mockup_mut(&m)
            .unwrap()
            .add_control(ControlKind::Checkbox, Rect::new(0, 0, 10, 10), ControlState::Checkbox { checked: true }, None)
            .unwrap();
        let s = p.add_scenario("s").unwrap();
        let e = p.append_entry(&s, &m).unwrap();
        p.entry_mut(&e).unwrap().record_event(InteractionEvent::pointer_down(10, 5, 5)).unwrap();
        p
    }

    #[test]
    fn clean_project_has_no_violations() {
        assert!(validate_project(&clean(), &assets()).is_empty());
    }

    #[test]
    fn bbox_out_of_bounds_reported_once() {
        let mut p = clean();
        p.mockups[0].controls.push(Control {
            id: ControlId::new("c09").unwrap(),
            kind: ControlKind::Button,
            bbox: Rect::new(750, 10, 100, 30),
            initial: ControlState::Button { pressed: false },
            label: None,
        });
        let v = validate_project(&p, &assets());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].reason.as_str(), "bbox_out_of_bounds");
        assert_eq!(v[0].path, "mockups/m01/controls/c09");
    }

    #[test]
    fn dangling_reference_after_mockup_removal() {
        let mut p = clean();
        p.mockups.clear();
        let v = validate_project(&p, &assets());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].reason, ViolationReason::DanglingMockupRef);
        assert_eq!(v[0].path, "scenarios/s01/entries/e01");
    }

    #[test]
    fn asset_problems() {
        let p = clean();
        let empty: HashMap<String, (u32, u32)> = HashMap::new();
        let v = validate_project(&p, &empty);
        assert_eq!(v[0].reason, ViolationReason::MissingAsset);
        let wrong: HashMap<String, (u32, u32)> = [("a.png".to_string(), (10, 10))].into_iter().collect();
        let v = validate_project(&p, &wrong);
        assert_eq!(v[0].reason, ViolationReason::DimensionMismatch);
    }

    #[test]
    fn duplicates_and_events() {
        let mut p = clean();
        let dup = p.mockups[0].clone();
        p.mockups.push(dup);
        p.mockups[0].id = MockupId::new("m01").unwrap();
        let e = p.scenarios[0].entries[0].clone();
        p.scenarios[0].entries.push(e);
        p.scenarios[0].entries[0].sequence = crate::model::EventSequence::from_events(vec![
            InteractionEvent::pointer_move(0, 900, 1),
        ])
        .unwrap();
        let reasons: Vec<_> = validate_project(&p, &assets()).into_iter().map(|v| v.reason).collect();
        assert!(reasons.contains(&ViolationReason::DuplicateMockupId));
        assert!(reasons.contains(&ViolationReason::DuplicateEntryId));
        assert!(reasons.contains(&ViolationReason::EventOutOfBounds));
    }

    #[test]
    fn validation_is_pure() {
        let mut p = clean();
        p.mockups[0].controls[0].initial = ControlState::Hotspot;
        p.asset_dir = "../up".into();
        let a = validate_project(&p, &assets());
        let b = validate_project(&p.clone(), &assets());
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
    }
}
