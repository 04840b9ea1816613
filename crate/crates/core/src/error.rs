use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the scheduling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its declared bounds.
    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    /// Input data (meteorological values, series) is malformed.
    #[error("input error: {0}")]
    Input(String),

    /// A numerical routine failed to converge or bracket.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The exhaustive oracle refused a model that is too large.
    #[error("enumeration refused: {assignments} assignments exceeds cap {cap}")]
    EnumerationCap { assignments: u128, cap: u128 },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
