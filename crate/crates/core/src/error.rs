use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("invalid world: {0}")]
    World(String),

    #[error("invalid goal condition: {0}")]
    Goal(String),

    #[error("invalid task: {0}")]
    Task(String),

    #[error("transcript has no line for goal {goal:?} at step {step}")]
    TranscriptMiss { goal: String, step: usize },

    #[error("episodic store: {0}")]
    Store(String),

    #[error("similarity undefined for a zero vector")]
    ZeroVector,

    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),

    #[error("configuration: {0}")]
    Config(String),

    #[error("trace: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn load(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Load {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
