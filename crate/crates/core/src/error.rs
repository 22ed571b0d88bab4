use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("weights are not unbalanced: {0}")]
    Weights(String),
    #[error("family is not generic: {0}")]
    NotGeneric(String),
    #[error("base point is on the discriminant: {0}")]
    BadFiber(String),
    #[error("no good base point found after {0} attempts")]
    Sampling(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("identity failed: {0}")]
    Identity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
