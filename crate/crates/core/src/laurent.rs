use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::ContourOracle;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pencil::LinearPencil;
use crate::tolerances::Tolerances;

/// The pair (T₋₁, T₀) from which every Laurent coefficient follows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicSolution {
    pub t_minus1: ComplexMatrix,
    pub t0: ComplexMatrix,
}

/// Residuals of the four basic-solution conditions, each relative to the
/// natural scale ‖T₋₁‖‖C₁‖ + ‖T₀‖‖C₀‖ (at least 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicResiduals {
    pub left: f64,
    pub right: f64,
    pub cross: f64,
    pub scale: f64,
}

impl BasicResiduals {
    pub fn max(&self) -> f64 {
        self.left.max(self.right).max(self.cross)
    }
}

impl BasicSolution {
    pub fn residuals(&self, pencil: &LinearPencil) -> BasicResiduals {
        let n = pencil.n;
        let id = ComplexMatrix::identity(n);
        let (tm1, t0) = (&self.t_minus1, &self.t0);
        let scale = (tm1.max_abs() * pencil.c1.norm1() + t0.max_abs() * pencil.c0.norm1()).max(1.0);
        let left = (&(&(tm1 * &pencil.c1) + &(t0 * &pencil.c0)) - &id).max_abs();
        let right = (&(&(&pencil.c1 * tm1) + &(&pencil.c0 * t0)) - &id).max_abs();
        let mut cross: f64 = 0.0;
        for c in [&pencil.c0, &pencil.c1] {
            cross = cross.max((&(tm1 * c) * t0).max_abs());
            cross = cross.max((&(t0 * c) * tm1).max_abs());
        }
        BasicResiduals { left: left / scale, right: right / scale, cross: cross / scale, scale }
    }

    pub fn validate(&self, pencil: &LinearPencil, tol: f64) -> Result<BasicResiduals> {
        let r = self.residuals(pencil);
        if !(r.max() <= tol) {
            return Err(Error::FundamentalResidualTooLarge { residual: r.max(), tol });
        }
        Ok(r)
    }

    /// T₋₁C₀, nilpotent exactly when the singularity is a pole.
    pub fn singular_operator(&self, pencil: &LinearPencil) -> ComplexMatrix {
        &self.t_minus1 * &pencil.c0
    }

    /// T₀C₁, whose powers generate the regular coefficients.
    pub fn regular_operator(&self, pencil: &LinearPencil) -> ComplexMatrix {
        &self.t0 * &pencil.c1
    }
}

/// (T₋₁, T₀) by contour quadrature, validated against the basic-solution conditions.
pub fn basic_solution(pencil: &LinearPencil, radius: f64, nodes: usize, tol: &Tolerances) -> Result<BasicSolution> {
    let oracle = ContourOracle::new(pencil, radius, nodes, tol)?;
    basic_solution_from_oracle(pencil, &oracle, tol)
}

pub fn basic_solution_from_oracle(pencil: &LinearPencil, oracle: &ContourOracle, tol: &Tolerances) -> Result<BasicSolution> {
    let basic = BasicSolution { t_minus1: oracle.coefficient(-1)?, t0: oracle.coefficient(0)? };
    basic.validate(pencil, tol.fund)?;
    Ok(basic)
}

/// Tⱼ from the basic solution: (−1)^(k−1)(T₋₁C₀)^(k−1)T₋₁ for j = −k < 0 and
/// (−1)^ℓ(T₀C₁)^ℓT₀ for j = ℓ ≥ 0.
pub fn laurent_coefficient(basic: &BasicSolution, pencil: &LinearPencil, j: i64) -> ComplexMatrix {
    if j < 0 {
        let k = (-j) as usize;
        let m = basic.singular_operator(pencil).pow(k - 1);
        let sign = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
        (&m * &basic.t_minus1).scale_real(sign)
    } else {
        let l = j as usize;
        let m = basic.regular_operator(pencil).pow(l);
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        (&m * &basic.t0).scale_real(sign)
    }
}

/// T₀, T₁, …, T_{count−1} by repeated multiplication with −T₀C₁.
pub fn regular_coefficients(basic: &BasicSolution, pencil: &LinearPencil, count: usize) -> Vec<ComplexMatrix> {
    let step = -basic.regular_operator(pencil);
    let mut out = Vec::with_capacity(count);
    let mut cur = basic.t0.clone();
    for _ in 0..count {
        let next = &step * &cur;
        out.push(cur);
        cur = next;
    }
    out
}

/// T₋₁, T₋₂, …, T₋count by repeated multiplication with −T₋₁C₀.
pub fn singular_coefficients(basic: &BasicSolution, pencil: &LinearPencil, count: usize) -> Vec<ComplexMatrix> {
    let step = -basic.singular_operator(pencil);
    let mut out = Vec::with_capacity(count);
    let mut cur = basic.t_minus1.clone();
    for _ in 0..count {
        let next = &step * &cur;
        out.push(cur);
        cur = next;
    }
    out
}

/// [I(z−1) + T₋₁C₀]⁻¹T₋₁ + [I + T₀C₁(z−1)]⁻¹T₀.
pub fn closed_form_resolvent(basic: &BasicSolution, pencil: &LinearPencil, z: Complex64, cond_cap: f64) -> Result<ComplexMatrix> {
    let n = pencil.n;
    let id = ComplexMatrix::identity(n);
    let w = z - 1.0;
    let sing = &id.scale(w) + &basic.singular_operator(pencil);
    let reg = &id + &basic.regular_operator(pencil).scale(w);
    let sing_inv = sing.inverse_checked(cond_cap).map_err(|cond| Error::SingularAtPoint { z, cond })?.0;
    let reg_inv = reg.inverse_checked(cond_cap).map_err(|cond| Error::SingularAtPoint { z, cond })?.0;
    Ok(&(&sing_inv * &basic.t_minus1) + &(&reg_inv * &basic.t0))
}

/// Laurent coefficients around z = 1 over a contiguous index window, with an
/// annulus estimate once one has been made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentExpansion {
    pub coefficients: BTreeMap<i64, ComplexMatrix>,
    pub annulus: Option<(f64, f64)>,
}

impl LaurentExpansion {
    pub fn from_basic(basic: &BasicSolution, pencil: &LinearPencil, k_max: usize, l_max: usize) -> Self {
        let mut coefficients = BTreeMap::new();
        for (i, t) in singular_coefficients(basic, pencil, k_max).into_iter().enumerate() {
            coefficients.insert(-(i as i64) - 1, t);
        }
        for (l, t) in regular_coefficients(basic, pencil, l_max + 1).into_iter().enumerate() {
            coefficients.insert(l as i64, t);
        }
        Self { coefficients, annulus: None }
    }

    pub fn from_oracle(oracle: &ContourOracle, k_max: usize, l_max: usize) -> Result<Self> {
        let mut coefficients = BTreeMap::new();
        for j in -(k_max as i64)..=(l_max as i64) {
            coefficients.insert(j, oracle.coefficient(j)?);
        }
        Ok(Self { coefficients, annulus: None })
    }

    pub fn get(&self, j: i64) -> Result<&ComplexMatrix> {
        self.coefficients.get(&j).ok_or_else(|| {
            let start = self.coefficients.keys().next().copied().unwrap_or(0);
            let end = self.coefficients.keys().last().copied().unwrap_or(-1);
            Error::IndexOutOfRange { t: j, start, end }
        })
    }

    pub fn with_annulus(mut self, k_max: usize, l_max: usize) -> Self {
        self.annulus = Some(annulus_estimate(&self, k_max, l_max));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalReport {
    pub j_range: (i64, i64),
    pub left: f64,
    pub right: f64,
    pub per_j: Vec<(i64, f64, f64)>,
    pub tol: f64,
    pub pass: bool,
}

/// Max residuals of T_{j−1}C₁ + TⱼC₀ = δ_{j0}I and C₁T_{j−1} + C₀Tⱼ = δ_{j0}I
/// over `j_lo..=j_hi`, in the max-entry norm.
pub fn verify_fundamental(pencil: &LinearPencil, expansion: &LaurentExpansion, j_lo: i64, j_hi: i64, tol: f64) -> Result<FundamentalReport> {
    let id = ComplexMatrix::identity(pencil.n);
    let zero = ComplexMatrix::zeros(pencil.n, pencil.n);
    let mut per_j = Vec::new();
    let (mut left, mut right) = (0.0f64, 0.0f64);
    for j in j_lo..=j_hi {
        let prev = expansion.get(j - 1)?;
        let cur = expansion.get(j)?;
        let delta = if j == 0 { &id } else { &zero };
        let l = (&(&(prev * &pencil.c1) + &(cur * &pencil.c0)) - delta).max_abs();
        let r = (&(&(&pencil.c1 * prev) + &(&pencil.c0 * cur)) - delta).max_abs();
        left = left.max(l);
        right = right.max(r);
        per_j.push((j, l, r));
    }
    Ok(FundamentalReport { j_range: (j_lo, j_hi), left, right, per_j, tol, pass: left <= tol && right <= tol })
}

/// Root-test estimates (s_hat, r_hat) over the upper half of each index window,
/// using the spectral norm.
pub fn annulus_estimate(expansion: &LaurentExpansion, k_max: usize, l_max: usize) -> (f64, f64) {
    let mut s_hat: f64 = 0.0;
    for k in (k_max / 2).max(1)..=k_max {
        if let Some(t) = expansion.coefficients.get(&-(k as i64)) {
            s_hat = s_hat.max(t.norm2().powf(1.0 / k as f64));
        }
    }
    let mut inv_r: f64 = 0.0;
    for l in (l_max / 2).max(1)..=l_max {
        if let Some(t) = expansion.coefficients.get(&(l as i64)) {
            inv_r = inv_r.max(t.norm2().powf(1.0 / l as f64));
        }
    }
    let r_hat = if inv_r > 0.0 { 1.0 / inv_r } else { f64::INFINITY };
    (s_hat, r_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn gr_ex(eps: f64) -> LinearPencil {
        let a0 = ComplexMatrix::from_real_rows(&[&[1.0, -eps], &[1.0, 1.0]]);
        let a1 = ComplexMatrix::from_real_rows(&[&[-1.0, 0.0], &[-1.0, -1.0]]);
        LinearPencil::from_a(a0, a1).unwrap()
    }

    fn gr_ex_basic(eps: f64) -> BasicSolution {
        BasicSolution {
            t_minus1: ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[0.0, 0.0]]),
            t0: ComplexMatrix::from_real_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]).scale_real(1.0 / eps),
        }
    }

    #[test]
    fn closed_form_basic_satisfies_conditions() {
        let p = gr_ex(0.5);
        let r = gr_ex_basic(0.5).residuals(&p);
        assert!(r.max() < 1e-15);
    }

    #[test]
    fn coefficient_recurrences() {
        let p = gr_ex(0.5);
        let b = gr_ex_basic(0.5);
        assert!(laurent_coefficient(&b, &p, -2).max_abs() < 1e-15);
        assert!(laurent_coefficient(&b, &p, 0).approx_eq(&b.t0, 0.0));
        let t3 = laurent_coefficient(&b, &p, 3);
        let expected = ComplexMatrix::from_real_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]).scale_real(16.0);
        assert!(t3.approx_eq(&expected, 1e-12));
        let regs = regular_coefficients(&b, &p, 5);
        assert!(regs[3].approx_eq(&t3, 1e-12));
    }

    #[test]
    fn closed_form_matches_direct_solve() {
        let p = gr_ex(0.5);
        let b = gr_ex_basic(0.5);
        let z = c64(1.25, 0.0);
        let a = closed_form_resolvent(&b, &p, z, 1e12).unwrap();
        let d = p.solve_at(z, 1e12).unwrap();
        assert!(a.approx_eq(&d, 1e-12));
    }

    #[test]
    fn fundamental_report_detects_perturbation() {
        let p = gr_ex(0.5);
        let b = gr_ex_basic(0.5);
        let e = LaurentExpansion::from_basic(&b, &p, 4, 6);
        let rep = verify_fundamental(&p, &e, -3, 5, 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
        let mut bad = e.clone();
        let t0 = bad.coefficients.get_mut(&0).unwrap();
        t0[(0, 0)] += c64(1e-3, 0.0);
        let rep = verify_fundamental(&p, &bad, -3, 5, 1e-6).unwrap();
        assert!(!rep.pass);
        assert!((rep.left.max(rep.right) - 1e-3).abs() < 1e-4);
        assert!(verify_fundamental(&p, &e, -5, 5, 1e-6).is_err());
    }

    #[test]
    fn annulus_of_gr_ex() {
        let p = gr_ex(0.5);
        let e = LaurentExpansion::from_basic(&gr_ex_basic(0.5), &p, 8, 40);
        let (s, r) = annulus_estimate(&e, 8, 40);
        assert_eq!(s, 0.0);
        assert!((r - 0.5).abs() < 0.05, "{r}");
    }
}
