//! Local HTTP/JSON session hosting one project for the recorder UI.
//!
//! Every accepted mutation bumps the session revision. Mutating requests
//! carry the revision they were based on and are refused with `409` when it
//! is stale. The project is written back to disk on shutdown.

mod error;

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use mockrec_core::model::{EntryId, InteractionEvent, MockupId, ModelError, Project, ScenarioId};
use mockrec_core::raster::{render_frame, Frame};
use mockrec_core::replay::{ReplayConfig, ScenarioPlayer};
use mockrec_core::store::{load_project, project_dir, save_project, AssetStore, StoreError};
use mockrec_core::video::{export_scenario_video, ExportConfig, ExportFormat, ExportReport};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::{oneshot, RwLock};

pub use error::{ApiError, ErrorBody};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot load project: {0}")]
    Load(StoreError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server failed: {0}")]
    Serve(std::io::Error),
    #[error("cannot save project: {0}")]
    Save(StoreError),
}

impl ServiceError {
    pub fn is_io(&self) -> bool {
        match self {
            ServiceError::Load(e) | ServiceError::Save(e) => e.is_io(),
            ServiceError::Bind { .. } | ServiceError::Serve(_) => true,
        }
    }
}

/// Project plus revision counter.
#[derive(Debug, Clone)]
pub struct Session {
    pub project: Project,
    pub revision: u64,
}

struct Shared {
    session: RwLock<Session>,
    project_path: PathBuf,
    assets: AssetStore,
    images: Mutex<HashMap<String, Arc<Frame>>>,
}

impl Shared {
    fn image(&self, image_ref: &str) -> Result<Arc<Frame>, ApiError> {
        if let Some(img) = self.images.lock().expect("image cache poisoned").get(image_ref) {
            return Ok(img.clone());
        }
        let frame = Arc::new(self.assets.load_frame(image_ref).map_err(|e| ApiError::store(e, image_ref))?);
        self.images.lock().expect("image cache poisoned").insert(image_ref.to_string(), frame.clone());
        Ok(frame)
    }

    /// Applies `edit` to a copy of the project and commits it only on
    /// success. Holding the write lock serializes all mutations.
    async fn mutate<T>(
        &self,
        expected_revision: u64,
        edit: impl FnOnce(&mut Project) -> Result<T, ApiError>,
    ) -> Result<(u64, T), ApiError> {
        let mut session = self.session.write().await;
        if session.revision != expected_revision {
            return Err(ApiError::conflict(expected_revision, session.revision));
        }
        let mut next = session.project.clone();
        let out = edit(&mut next)?;
        session.project = next;
        session.revision += 1;
        tracing::debug!(revision = session.revision, "mutation accepted");
        Ok((session.revision, out))
    }
}

/// Builds the API router for a loaded project stored at `project_path`.
fn router(shared: Arc<Shared>) -> Router {
    Router::new()
        .route("/api/project", get(get_project))
        .route("/api/scenarios/{sid}/entries", post(append_entry))
        .route("/api/scenarios/{sid}/entries/order", put(reorder_entries))
        .route("/api/scenarios/{sid}/entries/{eid}", delete(delete_entry))
        .route("/api/entries/{eid}/events", post(record_events).delete(clear_sequence))
        .route("/api/entries/{eid}/events/insert", post(insert_event))
        .route("/api/scenarios/{sid}/frame", get(get_frame))
        .route("/api/scenarios/{sid}/export", post(export))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint", "") })
        .with_state(shared)
}

/// A service accepting connections in the background.
pub struct RunningService {
    addr: SocketAddr,
    stop: oneshot::Sender<()>,
    task: tokio::task::JoinHandle<Result<Session, ServiceError>>,
}

impl RunningService {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting requests, waits for in-flight ones, saves the
    /// project and returns the final session.
    pub async fn shutdown(self) -> Result<Session, ServiceError> {
        let _ = self.stop.send(());
        self.task.await.map_err(|e| ServiceError::Serve(std::io::Error::other(e)))?
    }
}

/// Loads the project and starts serving on `bind`.
pub async fn start(project_path: &Path, bind: &str) -> Result<RunningService, ServiceError> {
    let (stop, stopped) = oneshot::channel();
    let (listener, shared) = prepare(project_path, bind).await?;
    let addr = listener.local_addr().map_err(ServiceError::Serve)?;
    let task = tokio::spawn(run(listener, shared, async {
        let _ = stopped.await;
    }));
    Ok(RunningService { addr, stop, task })
}

/// Serves until `shutdown` resolves, then saves the project.
pub async fn serve(
    project_path: &Path,
    bind: &str,
    shutdown: impl Future<Output = ()> + Send + 'static,
    on_ready: impl FnOnce(SocketAddr),
) -> Result<Session, ServiceError> {
    let (listener, shared) = prepare(project_path, bind).await?;
    on_ready(listener.local_addr().map_err(ServiceError::Serve)?);
    run(listener, shared, shutdown).await
}

async fn prepare(project_path: &Path, bind: &str) -> Result<(TcpListener, Arc<Shared>), ServiceError> {
    let project = load_project(project_path).map_err(ServiceError::Load)?;
    let listener =
        TcpListener::bind(bind).await.map_err(|source| ServiceError::Bind { addr: bind.to_string(), source })?;
    let shared = Arc::new(Shared {
        assets: AssetStore::for_project(project_path, &project),
        session: RwLock::new(Session { project, revision: 0 }),
        project_path: project_path.to_path_buf(),
        images: Mutex::new(HashMap::new()),
    });
    Ok((listener, shared))
}

async fn run(
    listener: TcpListener,
    shared: Arc<Shared>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<Session, ServiceError> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, project = %shared.project_path.display(), "session service listening");
    }
    axum::serve(listener, router(shared.clone())).with_graceful_shutdown(shutdown).await.map_err(ServiceError::Serve)?;
    let session = shared.session.read().await.clone();
    save_project(&session.project, &shared.project_path).map_err(ServiceError::Save)?;
    tracing::info!(revision = session.revision, "project saved");
    Ok(session)
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(v)| v).map_err(|e| ApiError::bad_request(e.body_text(), "body"))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request(e.body_text(), "query"))
}

fn parse_id<T: std::str::FromStr>(raw: &str, what: &str) -> Result<T, ApiError> {
    raw.parse().map_err(|_| ApiError::new(StatusCode::NOT_FOUND, &format!("unknown_{what}"), format!("no {what} {raw:?}"), raw))
}

fn scenario_path(sid: &ScenarioId) -> String {
    format!("scenarios/{sid}")
}

fn entry_path(project: &Project, eid: &EntryId) -> String {
    match project.locate_entry(eid) {
        Ok((si, _)) => format!("scenarios/{}/entries/{eid}", project.scenarios[si].id),
        Err(_) => format!("entries/{eid}"),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProjectSnapshot {
    pub revision: u64,
    pub project: Project,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Ack {
    pub revision: u64,
}

#[derive(Debug, Deserialize)]
struct RevisionQuery {
    expected_revision: u64,
}

async fn get_project(State(shared): State<Arc<Shared>>) -> Json<ProjectSnapshot> {
    let session = shared.session.read().await;
    Json(ProjectSnapshot { revision: session.revision, project: session.project.clone() })
}

#[derive(Debug, Deserialize)]
struct AppendEntry {
    expected_revision: u64,
    mockup_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EntryCreated {
    pub revision: u64,
    pub entry_id: EntryId,
}

async fn append_entry(
    State(shared): State<Arc<Shared>>,
    UrlPath(sid): UrlPath<String>,
    body: Result<Json<AppendEntry>, JsonRejection>,
) -> Result<(StatusCode, Json<EntryCreated>), ApiError> {
    let body = json_body(body)?;
    let sid: ScenarioId = parse_id(&sid, "scenario")?;
    let (revision, entry_id) = shared
        .mutate(body.expected_revision, |p| {
            let mid: MockupId = body.mockup_id.parse().map_err(|_| {
                ApiError::model(ModelError::UnknownMockup(body.mockup_id.clone()), "mockup_id")
            })?;
            p.append_entry(&sid, &mid).map_err(|e| ApiError::model(e, scenario_path(&sid)))
        })
        .await?;
    Ok((StatusCode::CREATED, Json(EntryCreated { revision, entry_id })))
}

#[derive(Debug, Deserialize)]
struct Reorder {
    expected_revision: u64,
    order: Vec<String>,
}

async fn reorder_entries(
    State(shared): State<Arc<Shared>>,
    UrlPath(sid): UrlPath<String>,
    body: Result<Json<Reorder>, JsonRejection>,
) -> Result<Json<Ack>, ApiError> {
    let body = json_body(body)?;
    let sid: ScenarioId = parse_id(&sid, "scenario")?;
    let (revision, ()) = shared
        .mutate(body.expected_revision, |p| {
            let path = scenario_path(&sid);
            let order = body
                .order
                .iter()
                .map(|raw| raw.parse::<EntryId>().map_err(|_| ApiError::model(ModelError::UnknownEntry(raw.clone()), &path)))
                .collect::<Result<Vec<_>, _>>()?;
            let scenario = p.scenario_mut(&sid).map_err(|e| ApiError::model(e, &path))?;
            scenario.reorder(&order).map_err(|e| {
                let code = if matches!(e, ModelError::UnknownEntry(_) | ModelError::IndexOutOfRange { .. } | ModelError::DuplicateId(_)) {
                    "invalid_permutation"
                } else {
                    e.reason_code()
                };
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string(), &path)
            })
        })
        .await?;
    Ok(Json(Ack { revision }))
}

async fn delete_entry(
    State(shared): State<Arc<Shared>>,
    UrlPath((sid, eid)): UrlPath<(String, String)>,
    q: Result<Query<RevisionQuery>, QueryRejection>,
) -> Result<Json<Ack>, ApiError> {
    let q = query(q)?;
    let sid: ScenarioId = parse_id(&sid, "scenario")?;
    let eid: EntryId = parse_id(&eid, "entry")?;
    let (revision, _) = shared
        .mutate(q.expected_revision, |p| {
            let path = format!("{}/entries/{eid}", scenario_path(&sid));
            let scenario = p.scenario_mut(&sid).map_err(|e| ApiError::model(e, scenario_path(&sid)))?;
            scenario.delete_entry(&eid).map_err(|e| ApiError::model(e, path))
        })
        .await?;
    Ok(Json(Ack { revision }))
}

#[derive(Debug, Deserialize)]
struct RecordEvents {
    expected_revision: u64,
    events: Vec<InteractionEvent>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EventsAck {
    pub revision: u64,
    /// Length of the entry's sequence after the edit.
    pub len: usize,
}

/// Looks up the entry and the size of its mockup, for clamping.
fn entry_bounds(p: &Project, eid: &EntryId) -> Result<(u32, u32), ApiError> {
    let entry = p.entry(eid).map_err(|e| ApiError::model(e, format!("entries/{eid}")))?;
    let mockup = p.entry_mockup(entry).ok_or_else(|| {
        ApiError::model(ModelError::UnknownMockup(entry.mockup_id.to_string()), entry_path(p, eid))
    })?;
    Ok((mockup.width_px, mockup.height_px))
}

async fn record_events(
    State(shared): State<Arc<Shared>>,
    UrlPath(eid): UrlPath<String>,
    body: Result<Json<RecordEvents>, JsonRejection>,
) -> Result<Json<EventsAck>, ApiError> {
    let body = json_body(body)?;
    let eid: EntryId = parse_id(&eid, "entry")?;
    if body.events.is_empty() {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_batch", "event batch is empty", "events"));
    }
    let (revision, len) = shared
        .mutate(body.expected_revision, |p| {
            let (w, h) = entry_bounds(p, &eid)?;
            let path = entry_path(p, &eid);
            let entry = p.entry_mut(&eid).map_err(|e| ApiError::model(e, &path))?;
            entry.record_events(body.events.into_iter().map(|e| e.clamped_to(w, h))).map_err(|e| {
                let path = match &e {
                    ModelError::NonMonotoneTimestamp { index, .. } => format!("{path}/events/{index}"),
                    _ => path.clone(),
                };
                ApiError::model(e, path)
            })?;
            Ok(entry.sequence.len())
        })
        .await?;
    Ok(Json(EventsAck { revision, len }))
}

#[derive(Debug, Deserialize)]
struct InsertEvent {
    expected_revision: u64,
    index: usize,
    event: InteractionEvent,
}

async fn insert_event(
    State(shared): State<Arc<Shared>>,
    UrlPath(eid): UrlPath<String>,
    body: Result<Json<InsertEvent>, JsonRejection>,
) -> Result<Json<EventsAck>, ApiError> {
    let body = json_body(body)?;
    let eid: EntryId = parse_id(&eid, "entry")?;
    let (revision, len) = shared
        .mutate(body.expected_revision, |p| {
            let (w, h) = entry_bounds(p, &eid)?;
            let path = format!("{}/events/{}", entry_path(p, &eid), body.index);
            let entry = p.entry_mut(&eid).map_err(|e| ApiError::model(e, &path))?;
            entry.insert_event(body.event.clamped_to(w, h), body.index).map_err(|e| ApiError::model(e, path))?;
            Ok(entry.sequence.len())
        })
        .await?;
    Ok(Json(EventsAck { revision, len }))
}

async fn clear_sequence(
    State(shared): State<Arc<Shared>>,
    UrlPath(eid): UrlPath<String>,
    q: Result<Query<RevisionQuery>, QueryRejection>,
) -> Result<Json<Ack>, ApiError> {
    let q = query(q)?;
    let eid: EntryId = parse_id(&eid, "entry")?;
    let (revision, ()) = shared
        .mutate(q.expected_revision, |p| {
            let path = entry_path(p, &eid);
            p.entry_mut(&eid).map_err(|e| ApiError::model(e, path))?.clear_sequence();
            Ok(())
        })
        .await?;
    Ok(Json(Ack { revision }))
}

#[derive(Debug, Deserialize)]
struct FrameQuery {
    t_ms: u64,
    hold_ms: Option<u64>,
    press_flash_ms: Option<u64>,
}

pub const REVISION_HEADER: &str = "x-mockrec-revision";

async fn get_frame(
    State(shared): State<Arc<Shared>>,
    UrlPath(sid): UrlPath<String>,
    q: Result<Query<FrameQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let q = query(q)?;
    let sid: ScenarioId = parse_id(&sid, "scenario")?;
    let defaults = ReplayConfig::default();
    let config = ReplayConfig {
        hold_ms: q.hold_ms.unwrap_or(defaults.hold_ms),
        press_flash_ms: q.press_flash_ms.unwrap_or(defaults.press_flash_ms),
        ..defaults
    };
    let (revision, png) = {
        let session = shared.session.read().await;
        let path = scenario_path(&sid);
        let scenario = session.project.scenario(&sid).ok_or_else(|| {
            ApiError::model(ModelError::UnknownScenario(sid.to_string()), &path)
        })?;
        let mut player = ScenarioPlayer::new(&session.project, scenario, &config).map_err(|e| ApiError::replay(e, &path))?;
        let (w, h) = player.canvas_size();
        let (_, mockup, state) = player.state_at(q.t_ms);
        let image = shared.image(&mockup.image_ref)?;
        let frame = render_frame(mockup, &image, &state, w, h)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "dimension_mismatch", e.to_string(), format!("mockups/{}", mockup.id)))?;
        (session.revision, frame.encode_png())
    };
    Ok(([(header::CONTENT_TYPE, "image/png".to_string()), (REVISION_HEADER.parse().expect("static header"), revision.to_string())], png)
        .into_response())
}

#[derive(Debug, Default, Deserialize)]
struct ExportRequest {
    fps: Option<u32>,
    hold_ms: Option<u64>,
    press_flash_ms: Option<u64>,
    format: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExportResponse {
    pub revision: u64,
    pub frames: u64,
    pub duration_ms: u64,
    pub bytes: u64,
    pub output: PathBuf,
    pub unfocused_key_events: usize,
}

async fn export(
    State(shared): State<Arc<Shared>>,
    UrlPath(sid): UrlPath<String>,
    body: Option<Json<ExportRequest>>,
) -> Result<Json<ExportResponse>, ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let sid: ScenarioId = parse_id(&sid, "scenario")?;
    let path = scenario_path(&sid);
    let defaults = ReplayConfig::default();
    let config = ReplayConfig::new(
        req.hold_ms.unwrap_or(defaults.hold_ms),
        req.fps.unwrap_or(defaults.fps),
        req.press_flash_ms.unwrap_or(defaults.press_flash_ms),
    )
    .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_fps", e.to_string(), "fps"))?;
    let exports = project_dir(&shared.project_path).join("exports");
    let (format, output) = match req.format.as_deref().unwrap_or("y4m") {
        "y4m" => (ExportFormat::Y4m, exports.join(format!("{sid}.y4m"))),
        "png" | "png_sequence" => (ExportFormat::PngSequence, exports.join(format!("{sid}_frames"))),
        other => return Err(ApiError::bad_request(format!("unknown export format {other:?} (y4m, png_sequence)"), "format")),
    };
    let session = shared.session.read().await.clone();
    let revision = session.revision;
    let assets = shared.assets.clone();
    let report: ExportReport = tokio::task::spawn_blocking(move || {
        std::fs::create_dir_all(&exports).map_err(|e| ApiError::internal(e.to_string(), "exports"))?;
        export_scenario_video(&session.project, &assets, &sid, &config, &ExportConfig { format, output })
            .map_err(|e| ApiError::video(e, &path))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string(), "export"))??;
    Ok(Json(ExportResponse {
        revision,
        frames: report.frames,
        duration_ms: report.duration_ms,
        bytes: report.bytes,
        output: report.output,
        unfocused_key_events: report.unfocused_key_events,
    }))
}
