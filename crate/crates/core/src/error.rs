use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },

    #[error("line {line}: unknown action_type {code}")]
    UnknownActionType { line: u64, code: String },

    #[error("song {song} owned by two artists ({first}, {second})")]
    ConflictingOwnership {
        song: String,
        first: String,
        second: String,
    },

    #[error("orphan song ids: {}", .0.join(","))]
    OrphanSongs(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("ARIMA fit did not converge (CSS trace: {trace:?})")]
    NonConvergence { trace: Vec<f64> },

    #[error("non-finite prediction at rolling iteration {iteration}")]
    NonFinitePrediction { iteration: usize },

    #[error("missing artifact: {0}")]
    MissingArtifact(PathBuf),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// Process exit code used by the CLI: 1 usage, 2 data, 3 training.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::Training(_) | Error::NonConvergence { .. } | Error::NonFinitePrediction { .. } => 3,
            _ => 2,
        }
    }
}
