//! Error type shared across the toolkit.

use thiserror::Error;

/// Errors produced by any pipeline stage.
///
/// The variants map onto the CLI exit codes: `Config` -> 1, `Data`/`Parse` -> 2,
/// `Numeric` -> 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or out-of-range parameter.
    #[error("config error: {0}")]
    Config(String),

    /// Input data violates a precondition (shape, symmetry, missing values, ...).
    #[error("data error: {0}")]
    Data(String),

    /// Malformed input file.
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
