use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid game, learner or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or out-of-range input data.
    #[error("data error: {0}")]
    Data(String),

    /// A log line that does not conform to the episode-log schema.
    #[error("line {line}: {message}")]
    LogLine { line: usize, message: String },

    #[error("insufficient data: {episodes} episodes recorded, at least {required} required")]
    InsufficientData { episodes: usize, required: usize },

    #[error("undefined comparison: random reference is {0}")]
    UndefinedComparison(f64),

    #[error("degenerate reference: perfect value {perfect} does not exceed random value {random}")]
    DegenerateReference { perfect: f64, random: f64 },

    #[error("regression fit failed: {0}")]
    Fit(String),

    #[error("output path {0} already exists (pass overwrite to replace it)")]
    PathCollision(PathBuf),

    #[error("schema version mismatch: found {found:?}, expected {expected:?}")]
    SchemaVersion { found: String, expected: String },

    #[error("io error at {path}: {source}")]
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
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::PathCollision(_) => 2,
            _ => 3,
        }
    }
}
