use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeckeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("support violation: {0}")]
    Support(String),
    /// A conjugation produced a non-integral matrix; the rewriting engine
    /// never does this on normal words.
    #[error("conjugation leaves the integral model: {0}")]
    NegativeShift(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("invalid relation instance: {0}")]
    Instance(String),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("parameter mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, HeckeError>;
