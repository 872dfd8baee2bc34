use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid quiver: {0}")]
    InvalidQuiver(String),

    #[error("growth gate failed: {0} (rerun with --force to allow finite-dimensional computations only)")]
    Unbounded(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("representation is not nilpotent: {0}")]
    NotNilpotent(String),

    #[error("side mismatch: {0}")]
    SideMismatch(String),

    #[error("invalid twist: {0}")]
    InvalidTwist(String),

    #[error("not AS-regular: {0}")]
    NotRegular(String),

    #[error("stabilization not certified at truncation {truncation}: {detail}; try truncation {suggested}")]
    Stabilization {
        truncation: usize,
        suggested: usize,
        detail: String,
    },

    #[error("{0}")]
    Invalid(String),
}
