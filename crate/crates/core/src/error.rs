//! Crate-wide error type.
//!
//! Variants are grouped by who is at fault: [`Error::Config`] means the
//! caller's parameters or file references are wrong (CLI exit code 2),
//! everything else means the data or an on-disk artifact is wrong
//! (CLI exit code 3).

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, flag combinations, or missing referenced paths.
    #[error("config error: {0}")]
    Config(String),

    /// Structurally malformed CSV input.
    #[error("CSV error at row {row}: {message}")]
    Csv { row: u64, message: String },

    /// A data invariant does not hold (bad counts, mismatched dimensions, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A serialized artifact failed to parse or failed a validation check.
    #[error("format error in {context}: {message}")]
    Format { context: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn format(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            message: message.into(),
        }
    }

    /// Process exit code under the CLI contract: 2 for usage/config errors,
    /// 3 for data/invariant errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
