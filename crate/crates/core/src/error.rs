use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// A score or statistic that is mathematically undefined for the input.
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("invalid submission: {0}")]
    InvalidSubmission(String),

    #[error("submission is missing {} gold word(s): {}", .0.len(), .0.join(", "))]
    MissingWords(Vec<String>),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn undefined(msg: impl Into<String>) -> Self {
        Error::Undefined(msg.into())
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: msg.into(),
        }
    }

    /// Validation failures (bad input) as opposed to I/O or internal faults.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
