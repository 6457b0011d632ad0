use thiserror::Error;

/// Errors raised by the cone wave toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("angular resolution too coarse: {samples} samples cannot resolve mode {mode}")]
    Aliasing { samples: usize, mode: i64 },

    #[error("Bessel evaluation out of range: order {order}, argument {arg}")]
    BesselRange { order: f64, arg: f64 },

    #[error("quadrature budget exhausted after {evaluations} evaluations (error estimate {estimate:.3e})")]
    RefinementBudget { evaluations: usize, estimate: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, ConeError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ConeError {
    ConeError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
