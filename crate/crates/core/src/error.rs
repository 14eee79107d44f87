use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A mathematical function was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A step or element index outside the valid range.
    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    /// Invalid configuration; `path` names the offending key.
    #[error("{path}: {reason}")]
    Config { path: String, reason: String },

    #[error("{path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

impl Error {
    pub fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn domain(reason: impl Into<String>) -> Self {
        Error::Domain(reason.into())
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            reason: err.to_string(),
        }
    }

    /// Process exit code for this error class: 2 for configuration, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 3,
        }
    }

    /// Prefix a configuration error path with a parent key.
    pub(crate) fn under(self, parent: &str) -> Self {
        match self {
            Error::Config { path, reason } => {
                let path = if path.is_empty() {
                    parent.to_string()
                } else if path.starts_with('[') {
                    format!("{parent}{path}")
                } else {
                    format!("{parent}.{path}")
                };
                Error::Config { path, reason }
            }
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
