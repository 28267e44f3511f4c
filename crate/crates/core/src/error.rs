use thiserror::Error;

/// Errors raised by the accountant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),
    /// An oracle or validator found a violated identity.
    #[error("validation failure: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
