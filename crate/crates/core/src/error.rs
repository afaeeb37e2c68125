//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally valid input for which the operation is undefined
    /// (zero vector, constant boundary trace, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A combination of parameters the toolkit deliberately does not cover.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A configured resource cap (node count, ...) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An iterative scheme failed to converge within its budget.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
