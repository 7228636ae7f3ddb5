//! Crate-wide error type.

use crate::vine::VineViolation;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument was outside the mathematical domain of the operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// Too few observations to fit anything.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Observations carry no information (e.g. all sizes equal the threshold).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A vine skeleton failed structural validation.
    #[error("invalid vine: {}", format_violations(.0))]
    InvalidVine(Vec<VineViolation>),

    /// A well-posed quantity the implementation does not evaluate.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Invariant breach that indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }
}

fn format_violations(violations: &[VineViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
