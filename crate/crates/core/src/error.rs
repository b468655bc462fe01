use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The requested problem exceeds a hard enumeration or grid cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A model or sampler configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Configuration(String),
    /// Not enough samples or replicas to form an estimate.
    #[error("statistics error: {0}")]
    Statistics(String),
    /// A numerical routine failed (non-finite values, no convergence).
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn capacity(msg: impl Into<String>) -> Error {
    Error::Capacity(msg.into())
}
