use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid law parameters: {0}")]
    InvalidLaw(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("vertex or edge outside the domain: {0}")]
    OutsideDomain(String),
    #[error("unsupported dimension {0} (only d = 2 and d = 3 are supported)")]
    Dimension(usize),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("assumption failed: {0}")]
    Assumption(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
