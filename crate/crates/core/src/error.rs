use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// `InvalidParameter` means the caller supplied a configuration that violates
/// a documented precondition, `Domain` means the data itself puts the
/// requested quantity outside its domain (e.g. a final-size estimate with
/// `Z = n`), and `NonConvergence` means an iterative routine hit its cap
/// without reaching tolerance.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("incomplete event log: {0}")]
    IncompleteLog(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
