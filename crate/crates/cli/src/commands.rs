use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use mockrec_core::fixture::{self, FixtureError};
use mockrec_core::model::{
    validate_project, ControlKind, ControlState, EntryId, MockupId, ModelError, Project, Rect, ScenarioId, Violation,
};
use mockrec_core::raster::render_frame;
use mockrec_core::replay::{frame_count, scenario_timeline, ReplayConfig, ReplayError, ScenarioPlayer};
use mockrec_core::store::{
    export_mockup_images, load_project, parse_events, parse_project, save_project, AssetStore, StoreError,
};
use mockrec_core::video::{export_scenario_video, ExportConfig, ExportFormat, VideoError};

use crate::{Command, Edit, Format, Kind, Timing};

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

fn violations_message(v: &[Violation]) -> String {
    let mut out = format!("project is invalid ({} violation(s))", v.len());
    for violation in v {
        out.push_str("\n  ");
        out.push_str(&violation.to_string());
    }
    out
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Invalid(v) => CliError::Invalid(violations_message(&v)),
            e if e.is_io() => CliError::Io(e.to_string()),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Invalid(format!("{}: {e}", e.reason_code()))
    }
}

impl From<VideoError> for CliError {
    fn from(e: VideoError) -> Self {
        match e {
            VideoError::UnknownScenario(_) | VideoError::OutputInUse(_) => CliError::Usage(e.to_string()),
            VideoError::Invalid(v) => CliError::Invalid(violations_message(&v)),
            VideoError::Store(s) => s.into(),
            VideoError::Io { .. } => CliError::Io(e.to_string()),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

type Result<T = ()> = std::result::Result<T, CliError>;

fn config(t: Timing) -> ReplayConfig {
    ReplayConfig { hold_ms: t.hold_ms, fps: t.fps, press_flash_ms: t.press_flash_ms }
}

fn id<T: std::str::FromStr>(raw: &str, what: &str) -> Result<T> {
    raw.parse().map_err(|_| CliError::Invalid(format!("{raw:?} is not a valid {what} id")))
}

/// A scenario named on the command line must exist; anything else is a usage error.
fn scenario_arg<'p>(project: &'p Project, raw: &str) -> Result<&'p mockrec_core::model::Scenario> {
    raw.parse::<ScenarioId>()
        .ok()
        .and_then(|sid| project.scenario(&sid))
        .ok_or_else(|| CliError::Usage(format!("unknown scenario {raw:?}")))
}

fn out(line: impl fmt::Display) {
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{line}");
}

pub fn run(command: Command) -> Result {
    match command {
        Command::Validate { project } => validate(&project),
        Command::Info { project, timing } => info(&project, config(timing)),
        Command::Export { project, scenario, timing, format, out: output } => {
            let project_path = project;
            let project = load_project(&project_path)?;
            let scenario = scenario_arg(&project, &scenario)?;
            let assets = AssetStore::for_project(&project_path, &project);
            let format = match format {
                Format::Y4m => ExportFormat::Y4m,
                Format::Png => ExportFormat::PngSequence,
            };
            let report =
                export_scenario_video(&project, &assets, &scenario.id, &config(timing), &ExportConfig { format, output })?;
            if report.unfocused_key_events > 0 {
                eprintln!("warning: {} key event(s) had no focused text input", report.unfocused_key_events);
            }
            out(report.line());
            Ok(())
        }
        Command::RenderFrame { project, scenario, t_ms, hold_ms, press_flash_ms, out: output } => {
            let project_path = project;
            let project = load_project(&project_path)?;
            let scenario = scenario_arg(&project, &scenario)?;
            let cfg = ReplayConfig { hold_ms, press_flash_ms, ..ReplayConfig::default() };
            let mut player = ScenarioPlayer::new(&project, scenario, &cfg).map_err(|e| CliError::Invalid(e.to_string()))?;
            let (w, h) = player.canvas_size();
            let (_, mockup, state) = player.state_at(t_ms);
            let image = AssetStore::for_project(&project_path, &project).load_frame(&mockup.image_ref)?;
            let frame = render_frame(mockup, &image, &state, w, h).map_err(|e| CliError::Invalid(e.to_string()))?;
            fs::write(&output, frame.encode_png()).map_err(|e| CliError::Io(format!("{}: {e}", output.display())))?;
            out(format!("entry={} mockup={} output={}", scenario.entries[player.timeline().locate(t_ms).0].id, mockup.id, output.display()));
            Ok(())
        }
        Command::ExportImages { project, out_dir } => {
            let loaded = load_project(&project)?;
            let assets = AssetStore::for_project(&project, &loaded);
            let count = export_mockup_images(&loaded, &assets, &out_dir)?;
            out(format!("files={count} output={}", out_dir.display()));
            Ok(())
        }
        Command::Edit { project, edit } => apply_edit(&project, edit),
        Command::Init { project } => {
            if project.exists() {
                return Err(CliError::Usage(format!("{} already exists", project.display())));
            }
            save_project(&Project::new(), &project)?;
            Ok(())
        }
        Command::FixtureWebstore { out_dir } => {
            let path = fixture::write_webstore(&out_dir).map_err(|e| match e {
                FixtureError::NotEmpty(_) => CliError::Usage(e.to_string()),
                FixtureError::Store(s) => s.into(),
            })?;
            out(format!("project={} steps={}", path.display(), out_dir.join(fixture::STEPS_FILE).display()));
            Ok(())
        }
        Command::Serve { project, bind } => serve(&project, &bind),
    }
}

fn validate(path: &Path) -> Result {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let project = match parse_project(&bytes) {
        Ok(p) => p,
        Err(e) => {
            out(format!("{}:{}:{}: {}: {}", path.display(), e.line, e.column, e.reason, e.message));
            return Err(CliError::Invalid("document could not be parsed".into()));
        }
    };
    let violations = validate_project(&project, &AssetStore::for_project(path, &project));
    for v in &violations {
        out(v);
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{} violation(s)", violations.len())))
    }
}

fn info(path: &Path, cfg: ReplayConfig) -> Result {
    let project = load_project(path)?;
    out(format!("schema_version={} mockups={} scenarios={}", project.format_version, project.mockups.len(), project.scenarios.len()));
    for m in &project.mockups {
        out(format!("mockup {} size={}x{} controls={} name={:?}", m.id, m.width_px, m.height_px, m.controls.len(), m.name));
    }
    for s in &project.scenarios {
        match scenario_timeline(&project, s, &cfg) {
            Ok(t) => out(format!(
                "scenario {} entries={} duration_ms={} frames={} name={:?}",
                s.id,
                s.entries.len(),
                t.total_ms,
                frame_count(t.total_ms, cfg.fps),
                s.name
            )),
            Err(ReplayError::EmptyScenario) => out(format!("scenario {} entries=0 duration_ms=0 frames=0 name={:?}", s.id, s.name)),
            Err(e) => return Err(CliError::Invalid(e.to_string())),
        }
    }
    Ok(())
}

fn parse_bbox(raw: &str) -> Result<Rect> {
    let parts: Vec<u32> = raw
        .split(',')
        .map(|p| p.trim().parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("bbox {raw:?} must be x,y,w,h")))?;
    match parts[..] {
        [x, y, w, h] => Ok(Rect::new(x, y, w, h)),
        _ => Err(CliError::Usage(format!("bbox {raw:?} must be x,y,w,h"))),
    }
}

fn initial_state(kind: ControlKind, raw: Option<String>) -> Result<ControlState> {
    let Some(raw) = raw else { return Ok(ControlState::default_for(kind)) };
    let bad = || CliError::Invalid(format!("incompatible_initial: {raw:?} is not a valid initial state for a {kind}"));
    Ok(match kind {
        ControlKind::Button => match raw.as_str() {
            "pressed" => ControlState::Button { pressed: true },
            "released" => ControlState::Button { pressed: false },
            _ => return Err(bad()),
        },
        ControlKind::Checkbox => match raw.as_str() {
            "checked" => ControlState::Checkbox { checked: true },
            "unchecked" => ControlState::Checkbox { checked: false },
            _ => return Err(bad()),
        },
        ControlKind::TextInput => ControlState::TextInput { text: raw },
        ControlKind::Hotspot if raw == "none" => ControlState::Hotspot,
        ControlKind::Hotspot => return Err(bad()),
    })
}

fn read_events(path: &Path) -> Result<Vec<mockrec_core::model::InteractionEvent>> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_events(&bytes).map_err(|e| CliError::Invalid(format!("{}:{}:{}: {}: {}", path.display(), e.line, e.column, e.reason, e.message)))
}

/// Loads, edits in memory, then saves through an atomic rename. Any error
/// before the rename leaves the project file as it was.
fn apply_edit(path: &Path, edit: Edit) -> Result {
    let mut project = load_project(path)?;
    let mut summary = String::new();
    match edit {
        Edit::AddMockup { image, name } => {
            let assets = AssetStore::for_project(path, &project);
            let imported = assets.import(&image)?;
            let id = project.add_mockup(&name, &imported.image_ref, imported.width_px, imported.height_px, &assets)?;
            summary = format!("mockup={id} image={} size={}x{}", imported.image_ref, imported.width_px, imported.height_px);
        }
        Edit::AddControl { mockup, kind, bbox, initial, label } => {
            let kind = match kind {
                Kind::Button => ControlKind::Button,
                Kind::TextInput => ControlKind::TextInput,
                Kind::Checkbox => ControlKind::Checkbox,
                Kind::Hotspot => ControlKind::Hotspot,
            };
            let bbox = parse_bbox(&bbox)?;
            let state = initial_state(kind, initial)?;
            let mid: MockupId = id(&mockup, "mockup")?;
            let id = project.mockup_mut(&mid)?.add_control(kind, bbox, state, label)?;
            summary = format!("control={id}");
        }
        Edit::AddScenario { name } => summary = format!("scenario={}", project.add_scenario(&name)?),
        Edit::AddEntry { scenario, mockup } => {
            let sid: ScenarioId = id(&scenario, "scenario")?;
            let mid: MockupId = id(&mockup, "mockup")?;
            summary = format!("entry={}", project.append_entry(&sid, &mid)?);
        }
        Edit::MoveEntry { scenario, entry, index } => {
            let sid: ScenarioId = id(&scenario, "scenario")?;
            let eid: EntryId = id(&entry, "entry")?;
            project.scenario_mut(&sid)?.move_entry(&eid, index)?;
        }
        Edit::DeleteEntry { scenario, entry } => {
            let sid: ScenarioId = id(&scenario, "scenario")?;
            let eid: EntryId = id(&entry, "entry")?;
            project.scenario_mut(&sid)?.delete_entry(&eid)?;
        }
        Edit::ClearSeq { entry } => {
            let eid: EntryId = id(&entry, "entry")?;
            project.entry_mut(&eid)?.clear_sequence();
        }
        Edit::Record { entry, events } => {
            let events = read_events(&events)?;
            let eid: EntryId = id(&entry, "entry")?;
            let entry = project.entry_mut(&eid)?;
            entry.record_events(events)?;
            summary = format!("events={}", entry.sequence.len());
        }
        Edit::InsertEvent { entry, at, events } => {
            let events = read_events(&events)?;
            let eid: EntryId = id(&entry, "entry")?;
            let entry = project.entry_mut(&eid)?;
            for (i, event) in events.into_iter().enumerate() {
                entry.insert_event(event, at + i)?;
            }
            summary = format!("events={}", entry.sequence.len());
        }
    }
    let bytes = save_project(&project, path)?;
    if summary.is_empty() {
        out(format!("bytes={bytes}"));
    } else {
        out(format!("{summary} bytes={bytes}"));
    }
    Ok(())
}

fn serve(path: &Path, bind: &str) -> Result {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    let result = runtime.block_on(mockrec_service::serve(
        path,
        bind,
        async {
            let _ = tokio::signal::ctrl_c().await;
        },
        |addr| out(format!("listening=http://{addr}")),
    ));
    match result {
        Ok(session) => {
            out(format!("saved revision={}", session.revision));
            Ok(())
        }
        Err(e) if e.is_io() => Err(CliError::Io(e.to_string())),
        Err(e) => Err(CliError::Invalid(e.to_string())),
    }
}
