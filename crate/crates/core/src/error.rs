use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrcError {
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, TrcError>;
