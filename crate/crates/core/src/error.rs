use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid range: lo = {lo} exceeds hi = {hi}")]
    InvalidRange { lo: i64, hi: i64 },

    #[error("missing support: index {index} is outside the sampled window [{lo}, {hi}]")]
    MissingSupport { index: i64, lo: i64, hi: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {required} candidates exceed the enumeration budget of {budget}")]
    ResourceLimit { required: u128, budget: u128 },

    #[error("unsupported theory: {0}")]
    UnsupportedTheory(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NumericInput { row: usize, col: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigenvalue iteration did not converge for index {index}")]
    NoConvergence { index: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed configuration: {0}")]
    Config(String),
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidArgument(msg.into())
    }
}
