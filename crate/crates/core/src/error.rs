use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("index {index} out of bounds for dimension {dim} (axis {axis})")]
    Bounds { index: usize, dim: usize, axis: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("sampling error: requested {requested} {kind} rows but only {available} available")]
    Sampling {
        kind: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("at tau = {tau}: {source}")]
    AtTau {
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line runner: 1 usage/config,
    /// 2 data, 3 numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 1,
            Error::Degenerate(_) => 3,
            Error::AtTau { source, .. } => source.exit_code(),
            Error::Dimension(_)
            | Error::Bounds { .. }
            | Error::Structural(_)
            | Error::NonFinite { .. }
            | Error::Parse { .. }
            | Error::Sampling { .. }
            | Error::Evaluation(_)
            | Error::Format(_)
            | Error::Io { .. } => 2,
        }
    }
}
