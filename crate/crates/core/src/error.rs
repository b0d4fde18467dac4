//! Shared error type for the whole laboratory.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is inconsistent or out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// An internal invariant was violated; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),

    /// The integrator left its declared accuracy envelope.
    #[error("integration quality error: {0}")]
    IntegrationQuality(String),

    /// A quadrature could not meet the requested tolerance.
    #[error("precision error: {0}")]
    Precision(String),

    /// Two independent estimates disagree beyond their combined error bars.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// An iterative search failed to converge.
    #[error("search failure: {0}")]
    SearchFailure(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
