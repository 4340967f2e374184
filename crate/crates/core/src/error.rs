use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes, lengths or values that violate a frame or sequence contract.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A sensor, scene or run parameter outside its allowed range.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// A file or byte stream that is not in the expected format at all.
    #[error("format error in {source_name}: {message}")]
    Format { source_name: String, message: String },

    /// A stream in the right format whose content is damaged.
    #[error("corrupt stream at byte offset {offset}: {message}")]
    Corruption { offset: usize, message: String },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A ratio or fraction whose denominator is zero.
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable short code used on the command line for machine parsing.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Config(_) => "config",
            Error::NotFound(_) => "not-found",
            Error::Format { .. } => "format",
            Error::Corruption { .. } => "corruption",
            Error::Capacity(_) => "capacity",
            Error::Undefined(_) => "undefined",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
        }
    }
}
