//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series too short: need at least {needed} observations, got {got}")]
    Length { needed: usize, got: usize },

    #[error("out of range: {0}")]
    Range(String),

    #[error("inconsistent differencing context: {0}")]
    Context(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("likelihood not computable: {0}")]
    Likelihood(String),

    /// Optimization failed after the full restart schedule. `best` holds the
    /// lowest-objective free-coefficient vector that was visited, if any.
    #[error("fit failed: {message}")]
    Fit {
        message: String,
        best: Option<Vec<f64>>,
    },

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid model: {0}")]
    Validation(String),

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("invalid value at row {row}, column '{column}': {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("model document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
