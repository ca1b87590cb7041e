use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("denominator vanishes at the evaluation point")]
    PoleAtPoint,
    #[error("V'(d) is not parallel to d (residual {residual:e})")]
    NotADarbouxPoint { residual: f64 },
    #[error("multiplier gamma is zero: improper Darboux point")]
    ZeroMultiplier,
    #[error("Hessian at the Darboux point is not diagonalizable")]
    NotDiagonalizable,
    #[error("index {index} out of range for {n} degrees of freedom")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("alpha and beta must differ")]
    AlphaEqualsBeta,
    #[error("systems do not share the same linear part")]
    LinearPartMismatch,
    #[error("invalid order {0}")]
    InvalidOrder(i64),
    #[error("operands belong to different energy regimes")]
    RegimeMismatch,
    #[error("evaluation point {0} is a branch point")]
    BranchPoint(String),
    #[error("contour passes within {distance:.3e} of a singularity (clearance {clearance})")]
    SingularityTooClose { distance: f64, clearance: f64 },
    #[error("step count too small: Richardson estimate {estimate:e} exceeds {tol:e}")]
    StepCountTooSmall { estimate: f64, tol: f64 },
    #[error("Z-linear independence of the frequencies is not established")]
    NonResonanceNotEstablished,
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
