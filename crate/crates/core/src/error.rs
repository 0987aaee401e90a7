//! Error type shared by every solver stage.

use thiserror::Error;

use crate::fixed_point::MfgSolution;

/// Failures raised by the discrete calculus, the PDE solvers and the
/// fixed-point driver.
#[derive(Debug, Error)]
pub enum MfgError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid too small: need nx >= {required}, got nx = {nx}")]
    GridTooSmall { nx: usize, required: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("negative density value {value:e} at node {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("mass mismatch: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },

    #[error("CFL violation at time step {step}: dt = {dt:e} exceeds bound {bound:e}")]
    CflViolation { step: usize, dt: f64, bound: f64 },

    #[error("Newton iteration diverged at time step {step} (residual {residual:e})")]
    NewtonDivergence { step: usize, residual: f64 },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("infeasible control pair: {0}")]
    InfeasiblePair(String),

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// Last iterate, with its report attached.
        partial: Box<MfgSolution>,
    },
}

pub type Result<T> = std::result::Result<T, MfgError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> MfgError {
    MfgError::InvalidParameter { name, reason: reason.into() }
}
