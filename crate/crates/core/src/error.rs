use thiserror::Error;

/// Errors raised by the library. The variants are grouped so that callers
/// (the CLI in particular) can map them onto distinct exit statuses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on user-supplied parameters failed.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Malformed textual or JSON input.
    #[error("parse error: {0}")]
    Parse(String),
    /// An internal consistency check failed, e.g. a merge boundary stabilizer
    /// produced a random outcome.
    #[error("integrity failure: {0}")]
    Integrity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn integrity<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Integrity(msg.into()))
}
