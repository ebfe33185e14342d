use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("no complete stocks")]
    NoCompleteStocks,

    #[error("zero variance in returns of `{ticker}`")]
    ZeroVariance { ticker: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("network is disconnected")]
    Disconnected,

    #[error("negative edge weight {weight} on ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },

    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize, last: Vec<f64> },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("window {index}: {source}")]
    Window {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn in_window(self, index: usize) -> Self {
        Error::Window { index, source: Box::new(self) }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::InvalidArgument(_)
            | Error::MissingArtifact(_)
            | Error::Csv(_)
            | Error::Json(_) => true,
            Error::Io { source, .. } => source.kind() == std::io::ErrorKind::NotFound,
            Error::Window { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
