use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid channel realization: {0}")]
    Realization(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no usable channel for a positive power budget of {0}")]
    InfeasibleBudget(f64),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("instance too large for exhaustive search: M = {m}, limit {limit}")]
    SizeLimit { m: usize, limit: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("M = {m}, trial {trial}: {source}")]
    Trial { m: usize, trial: usize, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
