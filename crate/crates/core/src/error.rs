use thiserror::Error;

/// Errors produced by the coding core, the simulator and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient results: need {needed}, got {got}")]
    InsufficientResults { needed: usize, got: usize },

    #[error("decode failure: {0}")]
    DecodeFailure(String),

    /// The dispatch estimator has no completed result for this worker yet.
    #[error("worker {0} has not returned a result yet")]
    NotReady(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
