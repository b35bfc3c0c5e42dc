use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum KgError {
    #[error("invalid graph: {0}")]
    Validation(String),

    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    #[error("{file}:{line}: {msg}")]
    Malformed {
        file: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("backend failure: {0}")]
    BackendFatal(String),

    #[error("evaluation error: {0}")]
    Eval(String),
}

impl KgError {
    /// Process exit code for the CLI: 1 usage/config, 2 data, 3 backend fatal.
    pub fn exit_code(&self) -> i32 {
        match self {
            KgError::Config(_) => 1,
            KgError::BackendFatal(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, KgError>;
