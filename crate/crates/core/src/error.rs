use thiserror::Error;

/// Failures of the geometric and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid support curve: {0}")]
    InvalidSupport(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("boundary points merged at t = {t}")]
    BoundaryCollision { t: f64 },
    #[error("integration failure at step {step}: {reason}")]
    IntegrationFailure { step: usize, reason: String },
}

pub type Result<T, E = FlowError> = std::result::Result<T, E>;
