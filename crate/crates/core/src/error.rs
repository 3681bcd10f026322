use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the toolkit.
///
/// The variants are grouped loosely by the failure class the command line
/// reports: malformed input data, invalid arguments or configuration, and
/// runtime failures during training.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-loop at line {line}")]
    SelfLoop { line: usize },

    #[error("line {line}: unknown interaction type `{token}`")]
    UnknownType { line: usize, token: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("duplicate protein id `{0}`")]
    DuplicateProtein(String),

    #[error("unknown protein `{0}`")]
    UnknownProtein(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value {context}")]
    NonFinite { context: String },

    #[error("node index {index} out of range for {len} nodes")]
    NodeOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("traversal exhausted after collecting {collected} of {target} test positives")]
    TraversalShortfall { collected: usize, target: usize },

    #[error("no node with degree in [1, {threshold})")]
    NoQualifyingRoot { threshold: usize },

    #[error("training failed: {0}")]
    Training(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by malformed or insufficient input data, as
    /// opposed to bad arguments or failures during a run.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::SelfLoop { .. }
                | Error::UnknownType { .. }
                | Error::Empty(_)
                | Error::DuplicateProtein(_)
                | Error::UnknownProtein(_)
                | Error::DimensionMismatch { .. }
                | Error::NonFinite { .. }
                | Error::Insufficient(_)
                | Error::TraversalShortfall { .. }
                | Error::NoQualifyingRoot { .. }
                | Error::Checkpoint(_)
        )
    }
}
