use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {what}")]
    LengthMismatch { what: String },

    #[error("point {index} is the zero vector; normalization by its l1 norm is undefined")]
    ZeroPoint { index: usize },

    #[error("invalid {field}: {reason}")]
    InvalidValue { field: String, reason: String },

    #[error("size cap exceeded: {what} is {size}, cap is {cap}")]
    CapExceeded {
        what: String,
        size: usize,
        cap: usize,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("requested tolerance {requested:e} is unreachable; achieved width {achieved:e}")]
    ToleranceUnreachable { achieved: f64, requested: f64 },

    #[error("{path}: field `{field}`: {reason}")]
    Parse {
        path: PathBuf,
        field: String,
        reason: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidValue {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn length(what: impl Into<String>) -> Self {
        Error::LengthMismatch { what: what.into() }
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn cap(what: impl Into<String>, size: usize, cap: usize) -> Self {
        Error::CapExceeded {
            what: what.into(),
            size,
            cap,
        }
    }

    /// Whether the failure is caused by the caller's input rather than by a
    /// failed numerical check. Drives the CLI exit code.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Solver(_) | Error::ToleranceUnreachable { .. })
    }
}
