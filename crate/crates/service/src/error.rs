use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use summalign_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown match {0}")]
    UnknownMatch(String),

    #[error("session {id} cannot be opened: {source}")]
    Unavailable { id: String, source: CoreError },

    #[error("{0}")]
    BadRequest(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownMatch(_) => StatusCode::NOT_FOUND,
            ApiError::Unavailable { .. } => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Core(e) => match e {
                CoreError::Conflict { .. } => StatusCode::CONFLICT,
                CoreError::State(_) => StatusCode::UNPROCESSABLE_ENTITY,
                CoreError::Input(_) | CoreError::Unit(..) => StatusCode::BAD_REQUEST,
                _ => StatusCode::INTERNAL_SERVER_ERROR,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        let mut body = json!({ "error": self.to_string() });
        if let ApiError::Core(CoreError::Conflict { index, current, .. }) = &self {
            body["proposal"] = json!(index);
            body["current_version"] = json!(current);
        }
        if status.is_server_error() {
            log::error!("{self}");
        }
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: std::net::SocketAddr,
        source: std::io::Error,
    },

    #[error("data directory {0} does not exist")]
    MissingData(std::path::PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
