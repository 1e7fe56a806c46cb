use thiserror::Error;

/// Every failure the core crate can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alpha must lie in (1, 2), got {0}")]
    InvalidAlpha(f64),
    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("infeasible stable-tail law: kappa * (2^-alpha + zeta(alpha) - 1) = {required} exceeds 1")]
    InfeasibleParameters { required: f64 },
    #[error("offspring law is not critical: mean = {mean}")]
    NotCritical { mean: f64 },
    #[error("offspring weights do not form a distribution: mass = {mass}")]
    NotADistribution { mass: f64 },
    #[error("offspring law has p_1 = 1; the tree never dies")]
    DegenerateLaw,
    #[error("argument {0} outside [0, 1]")]
    DomainError(f64),
    #[error("operation requires a stable-tail offspring law")]
    WrongKind,
    #[error("segment duration must be positive")]
    NonpositiveDuration,
    #[error("motion has nonzero mean displacement {mean}")]
    NonzeroMean { mean: f64 },
    #[error("invalid motion model: {0}")]
    InvalidMotion(&'static str),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(&'static str),
    #[error("grid point {x} exceeds the early-stop threshold {x_stop}")]
    GridBeyondStopThreshold { x: f64, x_stop: f64 },
    #[error("grid must be nonempty, positive and strictly increasing")]
    InvalidGrid,
    #[error("need at least {required} usable grid points in the fit window, found {usable}")]
    InsufficientData { usable: usize, required: usize },
    #[error("finite-variance constant requested without sigma2")]
    MissingSigma2,
    #[error("phi is defined for y >= 0, got {0}")]
    NegativeY(f64),
    #[error("shooting could not bracket the initial slope (tried [{lo}, {hi}])")]
    ShootingBracketFailure { lo: f64, hi: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last change {change:e})")]
    NotConverged { iterations: usize, change: f64 },
}
