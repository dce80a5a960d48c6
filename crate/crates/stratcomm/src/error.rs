use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error("{what} has size {size}, above the cap of {cap}")]
    TooLarge { what: &'static str, size: String, cap: u64 },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
