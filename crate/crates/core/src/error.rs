use thiserror::Error;

/// Errors raised by the numerical routines and file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("grid mismatch between {0}")]
    GridMismatch(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("source cell {0:?} lies outside the grid")]
    SourceOutOfBounds(Vec<usize>),
    #[error("source set is empty")]
    EmptySource,
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverNotConverged { iterations: usize, residual: f64 },
    #[error(
        "requested time {requested:e} s lies outside the retained history [{start:e}, {end:e}] s; \
         enlarge the history window or reduce t"
    )]
    HistoryExhausted {
        requested: f64,
        start: f64,
        end: f64,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
