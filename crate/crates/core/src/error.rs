use thiserror::Error;

/// Errors raised by graph construction, learning and classification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {0} is out of range")]
    InvalidNode(usize),
    #[error("unknown node label `{0}`")]
    UnknownLabel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Structural validation failed (cycle, self-loop, duplicate edge, ...).
    #[error("validation failed: {0}")]
    Validation(String),
    /// Background knowledge or rule application contradicts the graph.
    #[error("inconsistent: {0}")]
    Inconsistent(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// An operation was called in a state where its precondition does not hold.
    #[error("invalid state: {0}")]
    State(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        match err.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::other(err.to_string())),
            _ => Error::Parse(err.to_string()),
        }
    }
}
