//! Error types shared across the crate.

/// Errors produced by decoders, formulas and the simulation engine.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix, vector or box dimensions are inconsistent.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A matrix is numerically rank deficient (vanishing pivot).
    #[error("degenerate matrix: {0}")]
    Degenerate(String),

    /// A simulation or experiment configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two evaluation routes that must agree disagreed beyond tolerance.
    /// This indicates a bug, not bad input.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
