use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::BasicSolution;
use crate::linalg::ComplexMatrix;
use crate::pencil::LinearPencil;

/// Complementary projections P, Pᶜ on the domain and Q, Qᶜ on the range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    pub p: ComplexMatrix,
    pub p_c: ComplexMatrix,
    pub q: ComplexMatrix,
    pub q_c: ComplexMatrix,
}

impl SpectralPair {
    /// Largest of ‖P² − P‖, ‖Q² − Q‖, ‖P + Pᶜ − I‖, ‖Q + Qᶜ − I‖.
    pub fn defect(&self) -> f64 {
        let id = ComplexMatrix::identity(self.p.rows());
        let idem = |m: &ComplexMatrix| (&(m * m) - m).max_abs();
        idem(&self.p)
            .max(idem(&self.q))
            .max((&(&self.p + &self.p_c) - &id).max_abs())
            .max((&(&self.q + &self.q_c) - &id).max_abs())
    }
}

/// (P, Pᶜ, Q, Qᶜ) = (T₋₁C₁, T₀C₀, C₁T₋₁, C₀T₀).
pub fn projections(basic: &BasicSolution, pencil: &LinearPencil, tol: f64) -> Result<SpectralPair> {
    let pair = SpectralPair {
        p: &basic.t_minus1 * &pencil.c1,
        p_c: &basic.t0 * &pencil.c0,
        q: &pencil.c1 * &basic.t_minus1,
        q_c: &pencil.c0 * &basic.t0,
    };
    let scale = pair.p.max_abs().max(pair.q.max_abs()).max(1.0);
    let residual = pair.defect();
    if !(residual <= tol * scale * scale) {
        return Err(Error::ProjectionNotIdempotent { residual, tol });
    }
    Ok(pair)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    /// QCᵢP for i = 0, 1.
    pub singular_blocks: [ComplexMatrix; 2],
    /// QᶜCᵢPᶜ for i = 0, 1.
    pub regular_blocks: [ComplexMatrix; 2],
    /// max over i of ‖QCᵢPᶜ‖ and ‖QᶜCᵢP‖.
    pub off_block_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Restricts C₀, C₁ to the singular and regular parts and measures the
/// coupling the projections leave behind.
pub fn separate(pencil: &LinearPencil, proj: &SpectralPair, tol: f64) -> SeparationReport {
    let sandwich = |l: &ComplexMatrix, c: &ComplexMatrix, r: &ComplexMatrix| &(l * c) * r;
    let cs = [&pencil.c0, &pencil.c1];
    let singular_blocks = cs.map(|c| sandwich(&proj.q, c, &proj.p));
    let regular_blocks = cs.map(|c| sandwich(&proj.q_c, c, &proj.p_c));
    let mut off: f64 = 0.0;
    for c in cs {
        off = off.max(sandwich(&proj.q, c, &proj.p_c).max_abs());
        off = off.max(sandwich(&proj.q_c, c, &proj.p).max_abs());
    }
    let scale = pencil.scale().max(1.0);
    SeparationReport {
        singular_blocks,
        regular_blocks,
        off_block_residual: off,
        tol,
        pass: off <= tol * scale,
    }
}
