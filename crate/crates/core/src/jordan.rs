//! Singular and regular Jordan chains and the subspaces they generate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kernel_chain, max_principal_angle, ComplexMatrix, ComplexVector};
use crate::pencil::LinearPencil;
use crate::spectral::SpectralPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    Singular,
    Regular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// x₁ … x_n in index order (x₋₁ … x₋ₙ for singular chains).
    pub vectors: Vec<ComplexVector>,
    /// max over the last half of ‖xₙ‖^{1/n}.
    pub rate: f64,
    pub max_step_residual: f64,
}

fn root_rate(vectors: &[ComplexVector]) -> f64 {
    let n = vectors.len();
    if n == 0 {
        return 0.0;
    }
    let start = (n / 2).max(1);
    (start..=n)
        .map(|k| vectors[k - 1].norm().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
}

/// Follows `lhs · x_next = −rhs · x` by minimum-norm least squares, checking
/// each step's residual against `tol · ‖rhs‖ ‖x‖`.
fn follow(lhs: &ComplexMatrix, rhs: &ComplexMatrix, x_start: &ComplexVector, n_steps: usize, tol: f64) -> Result<Chain> {
    let mut vectors = Vec::with_capacity(n_steps);
    vectors.push(x_start.clone());
    let rhs_norm = rhs.norm2();
    let lhs_norm = lhs.norm2();
    let mut max_res: f64 = 0.0;
    for step in 1..n_steps {
        let x = &vectors[step - 1];
        let b = -rhs.mul_vec(x);
        let (y, res) = lhs.lstsq(&b, 1e-12);
        let scale = (rhs_norm * x.norm()).max(lhs_norm * y.norm());
        if scale > 0.0 && !(res <= tol * scale) {
            return Err(Error::StepInconsistent { step, residual: res / scale });
        }
        if scale > 0.0 {
            max_res = max_res.max(res / scale);
        }
        vectors.push(y);
    }
    let rate = root_rate(&vectors);
    Ok(Chain { vectors, rate, max_step_residual: max_res })
}

fn check_len(pencil: &LinearPencil, x: &ComplexVector) -> Result<()> {
    if x.len() != pencil.n {
        return Err(Error::ShapeMismatch(format!("start vector has length {}, pencil dimension is {}", x.len(), pencil.n)));
    }
    Ok(())
}

/// Chain with C₀x₋ₙ + C₁x₋ₙ₋₁ = 0 starting from x₋₁ = `x_start`.
pub fn singular_chain(pencil: &LinearPencil, x_start: &ComplexVector, n_steps: usize, tol: f64) -> Result<Chain> {
    check_len(pencil, x_start)?;
    follow(&pencil.c1, &pencil.c0, x_start, n_steps.max(1), tol)
}

/// Chain with C₁xₙ + C₀xₙ₊₁ = 0 starting from x₁ = `x_start`.
///
/// When C₀ is singular the plain least-squares step amplifies rounding error
/// in the singular directions by up to 1/σ_min(C₀) per step, and the chain
/// can break down even from an exact regular vector. If that happens and the
/// start vector lies in the regular subspace, the chain is followed within
/// that subspace instead, where C₀ is well conditioned; residuals are still
/// checked against the full recurrence.
pub fn regular_chain(pencil: &LinearPencil, x_start: &ComplexVector, n_steps: usize, tol: f64) -> Result<Chain> {
    check_len(pencil, x_start)?;
    let n_steps = n_steps.max(1);
    let raw = follow(&pencil.c0, &pencil.c1, x_start, n_steps, tol);
    if raw.is_ok() {
        return raw;
    }
    if let Ok(s) = split(pencil, 1e-9) {
        let reg = &s.reg;
        if reg.cols() > 0 && x_start.norm() > 0.0 {
            let (c, res) = reg.lstsq(x_start, 1e-12);
            if res <= 1e-8 * x_start.norm() {
                return follow_within(pencil, reg, &c, n_steps, tol);
            }
        }
    }
    raw
}

fn follow_within(pencil: &LinearPencil, basis: &ComplexMatrix, c_start: &ComplexVector, n_steps: usize, tol: f64) -> Result<Chain> {
    let lb = &pencil.c0 * basis;
    let rhs_norm = pencil.c1.norm2();
    let lhs_norm = pencil.c0.norm2();
    let mut vectors = vec![basis.mul_vec(c_start)];
    let mut max_res: f64 = 0.0;
    for step in 1..n_steps {
        let x = &vectors[step - 1];
        let b = -pencil.c1.mul_vec(x);
        let (c, _) = lb.lstsq(&b, 1e-12);
        let y = basis.mul_vec(&c);
        let res = (pencil.c0.mul_vec(&y) - &b).norm();
        let scale = (rhs_norm * x.norm()).max(lhs_norm * y.norm());
        if scale > 0.0 {
            if !(res <= tol * scale) {
                return Err(Error::StepInconsistent { step, residual: res / scale });
            }
            max_res = max_res.max(res / scale);
        }
        vectors.push(y);
    }
    let rate = root_rate(&vectors);
    Ok(Chain { vectors, rate, max_step_residual: max_res })
}

/// Orthonormal basis of a chain-generated subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainBasis {
    pub vectors: ComplexMatrix,
    pub decay_kind: DecayKind,
    /// Largest root-test rate over chains seeded by the basis vectors.
    pub observed_rate: f64,
    /// Whether `observed_rate` stays within the cap the caller asked for.
    pub within_cap: bool,
}

impl ChainBasis {
    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }
}

/// Invariant splitting of M = C₁⁻¹C₀ into its generalized kernel and the
/// complementary invariant subspace range(M^d).
struct Splitting {
    sin: ComplexMatrix,
    reg: ComplexMatrix,
}

fn split(pencil: &LinearPencil, rel_tol: f64) -> Result<Splitting> {
    let n = pencil.n;
    let cap = 1e12;
    match pencil.c1.inverse_checked(cap) {
        Ok((c1_inv, _)) => {
            let m = &c1_inv * &pencil.c0;
            let scale = m.norm2().max(f64::MIN_POSITIVE);
            let chain = kernel_chain(&m, rel_tol * scale, n + 1);
            let sin = chain.basis;
            let k = sin.cols();
            let reg = if k == 0 {
                ComplexMatrix::identity(n)
            } else if k == n {
                ComplexMatrix::zeros(n, 0)
            } else {
                let d = chain.dims.len();
                m.pow(d).leading_left_singular(n - k)
            };
            Ok(Splitting { sin, reg })
        }
        Err(_) => {
            if pencil.c0.inverse_checked(cap).is_ok() {
                // z = 1 is a regular point; every chain is regular
                Ok(Splitting { sin: ComplexMatrix::zeros(n, 0), reg: ComplexMatrix::identity(n) })
            } else {
                Err(Error::NotSupported(
                    "chain subspaces need C1 or C0 invertible; both are singular for this pencil".into(),
                ))
            }
        }
    }
}

/// Chains seeded inside `basis` and kept there: `lhs B c = −rhs x`.
fn restricted_rate(lhs: &ComplexMatrix, rhs: &ComplexMatrix, basis: &ComplexMatrix, n_steps: usize) -> f64 {
    if basis.cols() == 0 {
        return 0.0;
    }
    let step = &(basis * &(lhs * basis).pseudo_inverse(1e-12)) * rhs;
    let mut rate: f64 = 0.0;
    for j in 0..basis.cols() {
        let mut vectors = vec![basis.column(j)];
        for _ in 1..n_steps.max(1) {
            let next = -step.mul_vec(vectors.last().unwrap());
            vectors.push(next);
        }
        rate = rate.max(root_rate(&vectors));
    }
    rate
}

/// Basis of the subspace generated by singular chains that decay to zero:
/// the generalized kernel of C₁⁻¹C₀.
pub fn sin_basis(pencil: &LinearPencil, n_steps: usize, decay_tol: f64) -> Result<ChainBasis> {
    let s = split(pencil, decay_tol)?;
    let observed_rate = restricted_rate(&pencil.c1, &pencil.c0, &s.sin, n_steps);
    Ok(ChainBasis { vectors: s.sin, decay_kind: DecayKind::Singular, observed_rate, within_cap: true })
}

/// Basis of the subspace generated by regular chains: the invariant
/// complement of the generalized kernel of C₁⁻¹C₀.
pub fn reg_basis(pencil: &LinearPencil, n_steps: usize, rate_cap: f64) -> Result<ChainBasis> {
    let s = split(pencil, 1e-9)?;
    let observed_rate = restricted_rate(&pencil.c0, &pencil.c1, &s.reg, n_steps);
    Ok(ChainBasis { vectors: s.reg, decay_kind: DecayKind::Regular, observed_rate, within_cap: observed_rate <= rate_cap })
}

/// Principal angles between chain subspaces and projection ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    /// span(sin) vs range(P).
    pub sin_angle: f64,
    /// span(reg) vs range(Pᶜ).
    pub reg_angle: f64,
    /// C₁·span(sin) vs range(Q).
    pub sin_range_angle: f64,
    /// C₀·span(reg) vs range(Qᶜ).
    pub reg_range_angle: f64,
    pub dim_sin: usize,
    pub dim_reg: usize,
}

impl ChainCheck {
    pub fn max_angle(&self) -> f64 {
        self.sin_angle.max(self.reg_angle).max(self.sin_range_angle).max(self.reg_range_angle)
    }
}

pub fn compare_with_projections(pencil: &LinearPencil, sin: &ChainBasis, reg: &ChainBasis, proj: &SpectralPair) -> ChainCheck {
    // projections are either O(1) or numerically zero, so an absolute cut works
    let span = |m: &ComplexMatrix| m.range(1e-8 * m.norm2().max(1.0));
    ChainCheck {
        sin_angle: max_principal_angle(&sin.vectors, &span(&proj.p)),
        reg_angle: max_principal_angle(&reg.vectors, &span(&proj.p_c)),
        sin_range_angle: max_principal_angle(&span(&(&pencil.c1 * &sin.vectors)), &span(&proj.q)),
        reg_range_angle: max_principal_angle(&span(&(&pencil.c0 * &reg.vectors)), &span(&proj.q_c)),
        dim_sin: sin.dim(),
        dim_reg: reg.dim(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::linalg::unit_vector;

    #[test]
    fn c0_singular_chains() {
        let e = corpus::make_c0_example(0.25, 10).unwrap();
        let c = singular_chain(&e.pencil, &unit_vector(10, 0), 20, 1e-9).unwrap();
        assert!(c.vectors[1].norm() < 1e-15);
        assert_eq!(c.rate, 0.0);
        let c = singular_chain(&e.pencil, &unit_vector(10, 2), 40, 1e-9).unwrap();
        assert!((c.rate - 3.0).abs() < 0.1, "{}", c.rate);
    }

    #[test]
    fn c0_regular_chain_rates() {
        let lambda: f64 = 0.25;
        let e = corpus::make_c0_example(lambda, 10).unwrap();
        // the root test overshoots by about want^(-2/n) after n steps
        for k in 3..=5usize {
            let mu = lambda.powi(k as i32 - 2);
            let c = regular_chain(&e.pencil, &unit_vector(10, k - 1), 120, 1e-9).unwrap();
            let want = mu / (1.0 - mu);
            assert!((c.rate - want).abs() < 0.08 * want, "k={k} {} vs {want}", c.rate);
        }
    }

    #[test]
    fn zero_start() {
        let e = corpus::make_matrix_example(0.5).unwrap();
        let z = ComplexVector::zeros(2);
        assert_eq!(singular_chain(&e.pencil, &z, 10, 1e-9).unwrap().rate, 0.0);
        assert_eq!(regular_chain(&e.pencil, &z, 10, 1e-9).unwrap().rate, 0.0);
    }

    #[test]
    fn inconsistent_step_detected() {
        // C₁ = diag(1, 0) cannot reach the second coordinate
        let p = LinearPencil::new(ComplexMatrix::identity(2), ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]])).unwrap();
        let r = singular_chain(&p, &unit_vector(2, 1), 5, 1e-9);
        assert!(matches!(r, Err(Error::StepInconsistent { step: 1, .. })));
    }

    #[test]
    fn identity_pencil_bases() {
        let p = LinearPencil::identity(3);
        assert_eq!(sin_basis(&p, 10, 1e-9).unwrap().dim(), 0);
        assert_eq!(reg_basis(&p, 10, 10.0).unwrap().dim(), 3);
    }

    #[test]
    fn both_singular_not_supported() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let p = LinearPencil::new(m.clone(), m).unwrap();
        assert!(matches!(sin_basis(&p, 10, 1e-9), Err(Error::NotSupported(_))));
    }
}
