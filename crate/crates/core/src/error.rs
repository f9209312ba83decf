use thiserror::Error;

/// Errors raised by the statistics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Not enough observations for the requested quantity.
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The input collection was empty.
    #[error("empty input: {0}")]
    Empty(String),

    /// The data are degenerate for the requested quantity (e.g. zero variance).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The distribution kind is not supported by the operation.
    #[error("unsupported distribution for {op}: {kind}")]
    Unsupported { op: &'static str, kind: String },

    /// Arguments are individually valid but inconsistent with each other.
    #[error("mismatch: {0}")]
    Mismatch(String),

    /// An experiment or workflow configuration is invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;

pub(crate) fn domain(msg: impl Into<String>) -> StatsError {
    StatsError::Domain(msg.into())
}
