use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use mockrec_core::model::ModelError;
use mockrec_core::replay::ReplayError;
use mockrec_core::store::StoreError;
use mockrec_core::video::VideoError;
use serde::Serialize;

/// JSON error body returned by every failing request.
#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq, Eq)]
pub struct ErrorBody {
    pub reason_code: String,
    pub message: String,
    pub path: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, reason_code: &str, message: impl Into<String>, path: impl Into<String>) -> Self {
        Self { status, body: ErrorBody { reason_code: reason_code.into(), message: message.into(), path: path.into() } }
    }

    pub fn bad_request(message: impl Into<String>, path: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message, path)
    }

    pub fn conflict(expected: u64, current: u64) -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "revision_conflict",
            format!("expected revision {expected}, current revision is {current}"),
            "revision",
        )
    }

    pub fn model(e: ModelError, path: impl Into<String>) -> Self {
        let status = match e {
            ModelError::UnknownScenario(_) | ModelError::UnknownEntry(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.reason_code(), e.to_string(), path)
    }

    pub fn internal(message: impl Into<String>, path: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "io_error", message, path)
    }

    pub fn video(e: VideoError, path: impl Into<String>) -> Self {
        let path = path.into();
        match e {
            VideoError::UnknownScenario(_) => Self::new(StatusCode::NOT_FOUND, "unknown_scenario", e.to_string(), path),
            VideoError::Replay(r) => Self::replay(r, path),
            VideoError::Invalid(v) => {
                let first = v.first();
                Self::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    first.map_or("invalid_project", |v| v.reason.as_str()),
                    first.map_or_else(|| "project is invalid".to_string(), |v| v.to_string()),
                    first.map_or(path, |v| v.path.clone()),
                )
            }
            VideoError::Store(s) => Self::store(s, path),
            other => Self::internal(other.to_string(), path),
        }
    }

    pub fn replay(e: ReplayError, path: impl Into<String>) -> Self {
        let code = match e {
            ReplayError::EmptyScenario => "empty_scenario",
            ReplayError::DanglingMockup { .. } => "dangling_mockup_ref",
            ReplayError::InvalidFps => "invalid_fps",
        };
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string(), path)
    }

    pub fn store(e: StoreError, path: impl Into<String>) -> Self {
        match e {
            StoreError::Invalid(v) if !v.is_empty() => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, v[0].reason.as_str(), v[0].to_string(), v[0].path.clone())
            }
            other => Self::internal(other.to_string(), path),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
