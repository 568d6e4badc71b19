use thiserror::Error;

/// Errors shared by every estimator and data-handling module.
#[derive(Debug, Error)]
pub enum Error {
    /// A Cholesky pivot fell at or below the positive-definiteness tolerance.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Malformed tabular input. Line and column are 1-based.
    #[error("parse error at line {line}, field {field}: {message}")]
    Parse {
        line: usize,
        field: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A data column has zero median absolute deviation, so no robust
    /// scale exists for it.
    #[error("column {0} is degenerate (zero median absolute deviation)")]
    DegenerateColumn(usize),

    #[error("invalid fold count {k} for {n} observations")]
    InvalidK { k: usize, n: usize },

    #[error("input matrix is not square")]
    NonSquareInput,
}

pub type Result<T> = std::result::Result<T, Error>;
