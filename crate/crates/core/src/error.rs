use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bound {requested} exceeds the configured sieve bound {limit}")]
    SieveBound { requested: u64, limit: u64 },

    #[error("smallest-prime-factor table limited to {cap} entries, {requested} requested")]
    SpfCap { requested: u64, cap: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid checkpoint grid: {0}")]
    InvalidGrid(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model file line {line}: {msg}")]
    ModelSyntax { line: usize, msg: String },

    #[error("{constant}: target precision {requested:e} unreachable (best achievable {achievable:e})")]
    Precision {
        constant: String,
        requested: f64,
        achievable: f64,
    },

    #[error("ill-conditioned fit: condition estimate {condition:e}")]
    IllConditioned { condition: f64 },

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
