use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use missq_core::ErrorKind;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    #[error("dataset `{0}` already exists")]
    DatasetExists(String),

    #[error("bad request: {0}")]
    BadRequest(String),

    #[error("dataset `{id}` has no generator manifest")]
    NoManifest { id: String },

    #[error("analysis failed: {0}")]
    AnalysisFailed(String),

    #[error(transparent)]
    Core(#[from] missq_core::Error),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownDataset(_) | ApiError::NoManifest { .. } => StatusCode::NOT_FOUND,
            ApiError::DatasetExists(_) | ApiError::AnalysisFailed(_) => StatusCode::CONFLICT,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Core(e) => match e {
                missq_core::Error::UnknownVariable(_) | missq_core::Error::IndexOutOfRange { .. } => {
                    StatusCode::NOT_FOUND
                }
                _ => match e.kind() {
                    ErrorKind::Feasibility | ErrorKind::Ingestion => StatusCode::UNPROCESSABLE_ENTITY,
                    ErrorKind::Invalid | ErrorKind::Io => StatusCode::BAD_REQUEST,
                },
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ApiError::UnknownDataset(_) | ApiError::NoManifest { .. } => "not_found",
            ApiError::DatasetExists(_) => "conflict",
            ApiError::BadRequest(_) => "bad_request",
            ApiError::AnalysisFailed(_) => "failed",
            ApiError::Core(e) => match e.kind() {
                ErrorKind::Ingestion => "ingestion",
                ErrorKind::Invalid => "invalid",
                ErrorKind::Feasibility => "feasibility",
                ErrorKind::Io => "io",
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "kind": self.kind(), "message": self.to_string() } });
        (self.status(), Json(body)).into_response()
    }
}
