use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncation { expected: u64, found: u64 },

    #[error("data error: {0}")]
    Data(String),

    #[error("mixed frame rates: {0} vs {1}")]
    Unit(f64, f64),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("phase error: {0}")]
    Phase(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: {0} vs {1}")]
    Dim(usize, usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("version conflict on proposal {index}: expected {expected}, current {current}")]
    Conflict {
        index: usize,
        expected: u64,
        current: u64,
    },

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },
}

impl Error {
    /// True for errors caused by malformed input files rather than failed computation.
    pub fn is_format(&self) -> bool {
        matches!(
            self,
            Error::Format(_)
                | Error::Truncation { .. }
                | Error::Data(_)
                | Error::Schema(_)
                | Error::Phase(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}
