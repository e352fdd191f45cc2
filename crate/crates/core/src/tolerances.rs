use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every analysis stage.
///
/// `fund`, `solve` and `contour` are relative to the natural scale of the
/// quantity checked (usually a product of matrix norms). `tail` bounds the
/// relative size of the first discarded term in a truncated series, and
/// `rep` is the absolute reconstruction budget against the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub fund: f64,
    pub solve: f64,
    pub contour: f64,
    pub tail: f64,
    pub rep: f64,
    /// Condition estimate beyond which a matrix is treated as singular.
    pub cond_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fund: 1e-9,
            solve: 1e-9,
            contour: 1e-9,
            tail: 1e-10,
            rep: 1e-6,
            cond_cap: 1e12,
        }
    }
}
