use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Model(#[from] stratcomm::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for failed checks, 2 for anything wrong with the inputs or the environment.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            _ => 2,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
