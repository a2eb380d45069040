use thiserror::Error;

/// Errors raised by state, operator and measurement constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range for cutoff {cutoff}")]
    OutOfRange { index: usize, cutoff: usize },

    /// A truncated representation drops more probability than the budget allows.
    /// `required_cutoff` is the smallest cutoff that satisfies the budget.
    #[error(
        "truncation loss {loss:.3e} exceeds budget {budget:.1e}; use cutoff >= {required_cutoff}"
    )]
    Precision {
        loss: f64,
        budget: f64,
        required_cutoff: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("state has zero norm")]
    ZeroNorm,
}

pub type Result<T> = std::result::Result<T, FockError>;

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(FockError::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}
