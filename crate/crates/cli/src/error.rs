use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] primemean::Error),

    #[error("{0}")]
    Usage(String),

    #[error("oracle disagreement: {0}")]
    Oracle(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 bad grid, 3 precision, 4 unknown check, 5 ill-conditioned, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use primemean::Error as E;
        match self {
            CliError::Core(E::InvalidGrid(_) | E::SieveBound { .. }) => 2,
            CliError::Core(E::Precision { .. }) => 3,
            CliError::Core(E::UnknownCheck(_)) => 4,
            CliError::Core(E::IllConditioned { .. }) => 5,
            _ => 1,
        }
    }
}
