use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid optimizer, classifier or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("data error: {0}")]
    Data(String),

    /// A class is too small to be split in a stratified way.
    #[error("stratification error: class {class:?} has {count} row(s), at least 2 are required")]
    Stratification { class: String, count: usize },

    #[error("metrics error: {0}")]
    Metrics(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 1 usage/config, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 1,
            Error::Parse { .. }
            | Error::Schema { .. }
            | Error::Data(_)
            | Error::Stratification { .. }
            | Error::Metrics(_)
            | Error::Io { .. } => 2,
            Error::Json(_) | Error::Internal(_) => 3,
        }
    }

    /// Short machine-readable tag used in report error entries.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Usage(_) => "usage",
            Error::Parse { .. } => "parse",
            Error::Schema { .. } => "schema",
            Error::Data(_) => "data",
            Error::Stratification { .. } => "stratification",
            Error::Metrics(_) => "metrics",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Internal(_) => "internal",
        }
    }
}
