//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A position set exceeded the joint-shadowing matrix cap; callers must tile.
    #[error("capacity exceeded: {requested} positions > cap of {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("no active site provides coverage")]
    NoCoverage,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line} (last good line {last_good}): {msg}")]
    Parse {
        line: usize,
        last_good: usize,
        msg: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("injection error: {0}")]
    Injection(String),

    #[error("training error at epoch {epoch}: {msg}")]
    Training { epoch: usize, msg: String },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("state error: {0}")]
    State(String),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("compatibility error: {0}")]
    Compatibility(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
