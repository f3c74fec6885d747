use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("energy cap {cap} too small: result changed when the cap was raised")]
    CapTooSmall { cap: u64 },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Config(_) => 2,
            Error::Domain(_) | Error::Unsupported(_) | Error::CapTooSmall { .. } => 3,
            Error::Integrity(_) => 4,
        }
    }
}
