use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor received a parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An evaluation point lies outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model violates a structural or convergence requirement.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Input data cannot be processed (degenerate, out of range, malformed).
    #[error("bad data: {0}")]
    BadData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
