use std::time::Duration;

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is singular: zero pivot at index {pivot}")]
    Singular { pivot: usize },

    #[error("local block {block} is singular (zero pivot at local index {pivot})")]
    SingularBlock { block: usize, pivot: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("watchdog timeout: level {level} {role} group saw no exchange within {timeout:?}")]
    Timeout {
        level: usize,
        role: &'static str,
        timeout: Duration,
    },

    #[error("worker failure on level {level} ({role} group): {message}")]
    WorkerFailure {
        level: usize,
        role: &'static str,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}
