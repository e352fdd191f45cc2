//! Maclaurin coefficients of the singular and regular parts of the resolvent.

use crate::error::{Error, Result};
use crate::laurent::BasicSolution;
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::pencil::LinearPencil;

use super::model::ArmaModel;
use super::noise::Trajectory;

const INNER_CAP: f64 = 1e12;

/// Generators shared by the U/V coefficient sequences.
#[derive(Debug, Clone)]
pub struct InnerOperators {
    /// (I − T₋₁C₀)⁻¹
    pub sing_inv: ComplexMatrix,
    /// (I − T₀C₁)⁻¹
    pub reg_inv: ComplexMatrix,
    /// T₀C₁
    pub reg_op: ComplexMatrix,
}

impl InnerOperators {
    pub fn new(basic: &BasicSolution, pencil: &LinearPencil) -> Result<Self> {
        let id = ComplexMatrix::identity(pencil.n);
        let sing_inv = (&id - &basic.singular_operator(pencil))
            .inverse_checked(INNER_CAP)
            .map_err(|_| Error::SingularInnerMatrix { which: "I - T_-1 C_0" })?
            .0;
        let reg_op = basic.regular_operator(pencil);
        let reg_inv = (&id - &reg_op)
            .inverse_checked(INNER_CAP)
            .map_err(|_| Error::SingularInnerMatrix { which: "I - T_0 C_1" })?
            .0;
        Ok(Self { sing_inv, reg_inv, reg_op })
    }
}

/// Uₜ = −(I − T₋₁C₀)^{−t−1}T₋₁.
pub fn coeff_u(basic: &BasicSolution, pencil: &LinearPencil, t: usize) -> Result<ComplexMatrix> {
    let ops = InnerOperators::new(basic, pencil)?;
    Ok(-(&ops.sing_inv.pow(t + 1) * &basic.t_minus1))
}

/// Vₜ = (−1)ᵗ(I − T₀C₁)^{−t−1}(T₀C₁)ᵗT₀.
pub fn coeff_v(basic: &BasicSolution, pencil: &LinearPencil, t: usize) -> Result<ComplexMatrix> {
    let ops = InnerOperators::new(basic, pencil)?;
    let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
    Ok((&(&ops.reg_inv.pow(t + 1) * &ops.reg_op.pow(t)) * &basic.t0).scale_real(sign))
}

/// Rₛ = (−1)ˢ(A₀⁻¹A₁)ˢA₀⁻¹, the Maclaurin coefficients of A(z)⁻¹.
pub fn coeff_r(model: &ArmaModel, s: usize) -> ComplexMatrix {
    let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
    (&(model.a0_inv() * &model.a1).pow(s) * model.a0_inv()).scale_real(sign)
}

/// Qₛ = Rₛ − Uₛ.
pub fn coeff_q(model: &ArmaModel, basic: &BasicSolution, s: usize) -> Result<ComplexMatrix> {
    Ok(&coeff_r(model, s) - &coeff_u(basic, &model.pencil(), s)?)
}

/// U₀ … U_{count−1}.
pub fn u_series(basic: &BasicSolution, ops: &InnerOperators, count: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(count);
    let mut cur = -(&ops.sing_inv * &basic.t_minus1);
    for _ in 0..count {
        let next = &ops.sing_inv * &cur;
        out.push(cur);
        cur = next;
    }
    out
}

/// V₀ … V_{count−1}, using V_{t+1} = −(I − T₀C₁)⁻¹T₀C₁Vₜ.
pub fn v_series(basic: &BasicSolution, ops: &InnerOperators, count: usize) -> Vec<ComplexMatrix> {
    let step = -(&ops.reg_inv * &ops.reg_op);
    let mut out = Vec::with_capacity(count);
    let mut cur = &ops.reg_inv * &basic.t0;
    for _ in 0..count {
        let next = &step * &cur;
        out.push(cur);
        cur = next;
    }
    out
}

/// R₀ … R_{count−1}.
pub fn r_series(model: &ArmaModel, count: usize) -> Vec<ComplexMatrix> {
    let step = -(model.a0_inv() * &model.a1);
    let mut out = Vec::with_capacity(count);
    let mut cur = model.a0_inv().clone();
    for _ in 0..count {
        let next = &step * &cur;
        out.push(cur);
        cur = next;
    }
    out
}

/// Q₀ … Q_{count−1} as Rₛ − Uₛ.
pub fn q_series(model: &ArmaModel, basic: &BasicSolution, ops: &InnerOperators, count: usize) -> Vec<ComplexMatrix> {
    r_series(model, count).iter().zip(u_series(basic, ops, count)).map(|(r, u)| r - &u).collect()
}

/// Coefficients of k: (−1)ʳ(I − T₀C₁)^{−r}(T₀C₁)^{r−1}T₀ for r = 1..=count.
pub fn k_coefficients(basic: &BasicSolution, ops: &InnerOperators, count: usize) -> Vec<ComplexMatrix> {
    let step = -(&ops.reg_inv * &ops.reg_op);
    let mut out = Vec::with_capacity(count);
    let mut cur = -(&ops.reg_inv * &basic.t0);
    for _ in 0..count {
        let next = &step * &cur;
        out.push(cur);
        cur = next;
    }
    out
}

/// Smallest B ≥ 1 with ‖coef_B‖ ≤ tol·‖coef_1‖ among `coefs` (coef_r at index r − 1).
pub fn decay_length(coefs: &[ComplexMatrix], tol: f64) -> Option<usize> {
    let first = coefs.first()?.max_abs();
    if first == 0.0 {
        return Some(1);
    }
    coefs.iter().position(|c| c.max_abs() <= tol * first).map(|i| i + 1)
}

/// Checks that truncating at `b` terms leaves a relative tail below `tol`.
pub fn check_burn_in(coefs: &[ComplexMatrix], b: usize, tol: f64, what: &'static str) -> Result<()> {
    let first = coefs.first().map_or(0.0, |c| c.max_abs());
    if first == 0.0 {
        return Ok(());
    }
    let last = coefs.get(b.max(1) - 1).map_or(f64::INFINITY, |c| c.max_abs());
    let bound = last / first;
    if !(bound <= tol) {
        return Err(Error::TailNotConverged { what, bound, tol });
    }
    Ok(())
}

/// k = Σ_{r=1}^{B}(−1)ʳ(I − T₀C₁)^{−r}(T₀C₁)^{r−1}T₀ g(−r) over the presample
/// of `g`, checked for tail convergence.
pub fn k_vector(basic: &BasicSolution, pencil: &LinearPencil, g: &Trajectory, tol_tail: f64) -> Result<ComplexVector> {
    let ops = InnerOperators::new(basic, pencil)?;
    let b = presample_len(g);
    let coefs = k_coefficients(basic, &ops, b.max(1));
    if b > 0 {
        check_burn_in(&coefs, b, tol_tail, "k vector presample")?;
    }
    let mut k = ComplexVector::zeros(pencil.n);
    for r in 1..=b {
        k += coefs[r - 1].mul_vec(g.get(-(r as i64))?);
    }
    Ok(k)
}

/// k(t) = Σ_{r=1}^{B} Q_{t+r} g(−r).
pub fn k_series(model: &ArmaModel, basic: &BasicSolution, g: &Trajectory, t: usize, tol_tail: f64) -> Result<ComplexVector> {
    let pencil = model.pencil();
    let ops = InnerOperators::new(basic, &pencil)?;
    let b = presample_len(g);
    let q = q_series(model, basic, &ops, t + b + 1);
    if b > 0 {
        check_burn_in(&q[1..], b, tol_tail, "k series presample")?;
    }
    let mut k = ComplexVector::zeros(model.dim());
    for r in 1..=b {
        k += q[t + r].mul_vec(g.get(-(r as i64))?);
    }
    Ok(k)
}

/// Number of presample values g(−1), g(−2), … available.
pub fn presample_len(g: &Trajectory) -> usize {
    if g.t_start >= 0 {
        0
    } else {
        (-g.t_start) as usize
    }
}
