//! Trapezoid-rule Cauchy integrals of the resolvent on circles around z = 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pencil::{log_det, LinearPencil};
use crate::tolerances::Tolerances;

pub const DEFAULT_NODES: usize = 64;

/// Resolvent samples on |z − 1| = radius at 2N equispaced nodes. The N-node
/// rule uses every other sample, so each coefficient comes with its own
/// node-doubling check at no extra solves.
#[derive(Debug, Clone)]
pub struct ContourOracle {
    pub radius: f64,
    pub nodes: usize,
    pub tol: f64,
    samples: Vec<ComplexMatrix>,
}

impl ContourOracle {
    pub fn new(pencil: &LinearPencil, radius: f64, nodes: usize, tol: &Tolerances) -> Result<Self> {
        Self::from_solver(radius, nodes, tol, |z| pencil.solve_at(z, tol.cond_cap))
    }

    /// Oracle for any resolvent given pointwise by `solve`.
    pub fn from_solver<F>(radius: f64, nodes: usize, tol: &Tolerances, solve: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<ComplexMatrix> + Sync,
    {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("contour radius must be positive, got {radius}")));
        }
        if nodes < 16 {
            return Err(Error::InvalidInput(format!("at least 16 quadrature nodes required, got {nodes}")));
        }
        let m = 2 * nodes;
        let samples = (0..m)
            .into_par_iter()
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / m as f64;
                solve(1.0 + Complex64::from_polar(radius, theta))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { radius, nodes, tol: tol.contour, samples })
    }

    fn estimate(&self, j: i64, stride: usize) -> ComplexMatrix {
        let m = self.samples.len();
        let count = m / stride;
        let n = self.samples[0].rows();
        let mut acc = ComplexMatrix::zeros(n, n);
        for k in 0..count {
            let idx = k * stride;
            let theta = 2.0 * PI * idx as f64 / m as f64;
            let w = Complex64::from_polar(1.0, -(j as f64) * theta);
            acc = acc + self.samples[idx].scale(w);
        }
        acc.scale_real(self.radius.powi(-(j as i32)) / count as f64)
    }

    /// Tⱼ from the 2N-node rule, checked against the N-node rule. The
    /// disagreement is measured relative to max(1, ‖Tⱼ‖).
    pub fn coefficient(&self, j: i64) -> Result<ComplexMatrix> {
        let (fine, change) = self.coefficient_with_change(j);
        if !(change <= self.tol) {
            return Err(Error::NonConverged { j, change, tol: self.tol });
        }
        Ok(fine)
    }

    pub fn coefficient_with_change(&self, j: i64) -> (ComplexMatrix, f64) {
        let fine = self.estimate(j, 1);
        let coarse = self.estimate(j, 2);
        let change = fine.max_abs_diff(&coarse) / fine.max_abs().max(1.0);
        (fine, change)
    }
}

/// Single Laurent coefficient by contour quadrature.
pub fn contour_coefficient(
    pencil: &LinearPencil,
    j: i64,
    radius: f64,
    nodes: usize,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    ContourOracle::new(pencil, radius, nodes, tol)?.coefficient(j)
}

fn winding(pencil: &LinearPencil, radius: f64) -> Option<i64> {
    let m = (4 * pencil.n).max(256);
    let logs: Option<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / m as f64;
            log_det(&pencil.evaluate(1.0 + Complex64::from_polar(radius, theta)))
        })
        .collect();
    let logs = logs?;
    let mut total = 0.0;
    for k in 0..m {
        let d = logs[(k + 1) % m] - logs[k];
        total += d.im - 2.0 * PI * (d.im / (2.0 * PI)).round();
    }
    Some((total / (2.0 * PI)).round() as i64)
}

/// Number of zeros of det A(z) inside |z − 1| = radius, or `None` when the
/// circle passes through one.
pub fn zeros_inside(pencil: &LinearPencil, radius: f64) -> Option<i64> {
    winding(pencil, radius)
}

fn count_robust(pencil: &LinearPencil, radius: f64) -> i64 {
    let mut r = radius;
    for _ in 0..8 {
        if let Some(c) = winding(pencil, r) {
            return c;
        }
        r *= 1.013_7;
    }
    winding(pencil, r * 1.1).unwrap_or(i64::MAX)
}

/// Distance from z = 1 to the nearest other zero of det A(z), searched up to
/// `cap`, by counting zeros with the argument principle.
///
/// Counts come from LU factorizations of A(z) itself. Reducing C₁⁻¹C₀ to a
/// condensed form first would be cheaper but smears a highly defective zero
/// at z = 1 into a cloud of spurious nearby zeros.
pub fn nearest_other_singularity(pencil: &LinearPencil, cap: f64) -> Option<f64> {
    if pencil.n == 0 {
        return None;
    }
    let lo0 = 1e-4;
    let m0 = count_robust(pencil, lo0);
    let mut lo = lo0;
    let mut hi = None;
    let mut r = lo0;
    while r < cap {
        let next = (4.0 * r).min(cap);
        if count_robust(pencil, next) != m0 {
            hi = Some(next);
            break;
        }
        lo = next;
        r = next;
    }
    let mut hi = hi?;
    for _ in 0..30 {
        if hi / lo < 1.0 + 1e-3 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if count_robust(pencil, mid) != m0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Contour radius halfway between z = 1 and the nearest other singular point,
/// or 1 when none is found within distance 8.
pub fn default_radius(pencil: &LinearPencil) -> f64 {
    match nearest_other_singularity(pencil, 8.0) {
        Some(d) => 0.5 * d,
        None => 1.0,
    }
}
