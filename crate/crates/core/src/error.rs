//! Crate-wide error type.
//!
//! The three failure categories map onto the distinct process exit codes of the
//! experiment driver: invalid configuration, exceeded resource budgets, and
//! mathematical domain violations.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured resource budget (population cap, restart cap, support cap)
    /// was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A configuration document is invalid or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
