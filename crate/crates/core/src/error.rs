use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by pencil analysis, representation and augmentation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pencil is singular or ill-conditioned at z = {z} (condition estimate {cond:.3e})")]
    SingularAtPoint { z: Complex64, cond: f64 },

    #[error("contour quadrature did not converge: node-doubling change {change:.3e} exceeds {tol:.3e} at j = {j}")]
    NonConverged { j: i64, change: f64, tol: f64 },

    #[error("basic solution fails the fundamental conditions: residual {residual:.3e} exceeds {tol:.3e}")]
    FundamentalResidualTooLarge { residual: f64, tol: f64 },

    #[error("projection is not idempotent: residual {residual:.3e} exceeds {tol:.3e}")]
    ProjectionNotIdempotent { residual: f64, tol: f64 },

    #[error("nilpotency test inconclusive: ||(T_-1 C_0)^k|| plateaus at {plateau:.3e} up to k = {k_max}")]
    Inconclusive { k_max: usize, plateau: f64 },

    #[error("Jordan chain step {step} is inconsistent: residual {residual:.3e}")]
    StepInconsistent { step: usize, residual: f64 },

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("time index {t} is outside the available range [{start}, {end}]")]
    IndexOutOfRange { t: i64, start: i64, end: i64 },

    #[error("A_0 is singular; the recursion cannot be solved forward")]
    SingularA0,

    #[error("inner matrix {which} is singular")]
    SingularInnerMatrix { which: &'static str },

    #[error("series tail has not converged: bound {bound:.3e} exceeds {tol:.3e} ({what})")]
    TailNotConverged { what: &'static str, bound: f64, tol: f64 },

    #[error("natural representation diverges: regular radius estimate {r_hat:.4} <= 1")]
    NaturalFormDiverges { r_hat: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("repeated blocks of T_{index} disagree by {disagreement:.3e}")]
    BlockInconsistent { index: i64, disagreement: f64 },

    #[error("sigma = {sigma} must lie in (0, 1)")]
    SigmaNotLessThanOne { sigma: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
