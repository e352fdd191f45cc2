//! Worked example pencils with their closed-form Laurent data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, ComplexVector};
use crate::pencil::LinearPencil;
use crate::singularity::SingularityClass;

/// Where an expected value comes from: the example's published closed form,
/// or an independent derivation from the pencil itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Published,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CorpusKind {
    Matrix { eps: f64 },
    C0 { lambda: f64, n: usize },
    Volterra { n: usize },
    Hierarchy { lambdas: Vec<f64> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub t_minus1: Option<ComplexMatrix>,
    pub t_minus2: Option<ComplexMatrix>,
    pub t0: Option<ComplexMatrix>,
    pub p: Option<ComplexMatrix>,
    pub q: Option<ComplexMatrix>,
    pub class: Option<SingularityClass>,
    pub regular_radius: Option<f64>,
    pub sources: BTreeMap<String, Source>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub kind: CorpusKind,
    pub pencil: LinearPencil,
    pub expected: Expected,
    pub truncation: Option<usize>,
    pub notes: Vec<String>,
}

fn record(sources: &mut BTreeMap<String, Source>, items: &[(&str, Source)]) {
    for (k, s) in items {
        sources.insert((*k).to_string(), *s);
    }
}

/// 2×2 example with A₀ = [[1, −ε], [1, 1]], A₁ = [[−1, 0], [−1, −1]].
pub fn make_matrix_example(eps: f64) -> Result<CorpusEntry> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("eps must be finite and nonzero, got {eps}")));
    }
    let a0 = ComplexMatrix::from_real_rows(&[&[1.0, -eps], &[1.0, 1.0]]);
    let a1 = ComplexMatrix::from_real_rows(&[&[-1.0, 0.0], &[-1.0, -1.0]]);
    let pencil = LinearPencil::from_a(a0, a1)?;
    let kind = CorpusKind::Matrix { eps };
    let mut expected = Expected {
        t_minus1: Some(ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[0.0, 0.0]])),
        t_minus2: Some(ComplexMatrix::zeros(2, 2)),
        t0: None,
        p: Some(ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]])),
        q: Some(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 1.0]])),
        class: Some(SingularityClass::Pole { order: 1 }),
        regular_radius: Some(eps.abs()),
        sources: BTreeMap::new(),
    };
    expected.t0 = expected_coefficient(&kind, 0);
    record(
        &mut expected.sources,
        &[
            ("t_minus1", Source::Published),
            ("t_minus2", Source::Derived),
            ("t0", Source::Published),
            ("t_ell", Source::Published),
            ("p", Source::Published),
            ("q", Source::Published),
            ("class", Source::Derived),
            ("regular_radius", Source::Published),
        ],
    );
    let mut notes = Vec::new();
    if (eps.abs() - 1.0).abs() < 1e-12 {
        notes.push("regular radius equals 1: natural representations sit on the convergence boundary".into());
    }
    Ok(CorpusEntry { kind, pencil, expected, truncation: None, notes })
}

/// Coordinate-truncated sequence-space example: A₀ = I and
/// A₁ = −([[1, 1], [0, 1]] ⊕ diag(λ^{j−2}, j = 3..n)).
pub fn make_c0_example(lambda: f64, n: usize) -> Result<CorpusEntry> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidInput(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if n < 4 {
        return Err(Error::InvalidInput(format!("truncation must be at least 4, got {n}")));
    }
    let mut a1 = ComplexMatrix::zeros(n, n);
    a1[(0, 0)] = c64(-1.0, 0.0);
    a1[(0, 1)] = c64(-1.0, 0.0);
    a1[(1, 1)] = c64(-1.0, 0.0);
    for j in 2..n {
        a1[(j, j)] = c64(-lambda.powi(j as i32 - 1), 0.0);
    }
    let pencil = LinearPencil::from_a(ComplexMatrix::identity(n), a1)?;
    let kind = CorpusKind::C0 { lambda, n };
    let mut t_minus1 = ComplexMatrix::zeros(n, n);
    t_minus1.set_block(0, 0, &ComplexMatrix::from_real_rows(&[&[-1.0, 1.0], &[0.0, -1.0]]));
    let mut t_minus2 = ComplexMatrix::zeros(n, n);
    t_minus2[(0, 1)] = c64(1.0, 0.0);
    let mut proj = ComplexMatrix::zeros(n, n);
    proj[(0, 0)] = c64(1.0, 0.0);
    proj[(1, 1)] = c64(1.0, 0.0);
    let mut expected = Expected {
        t_minus1: Some(t_minus1),
        t_minus2: Some(t_minus2),
        t0: expected_coefficient(&kind, 0),
        p: Some(proj.clone()),
        q: Some(proj),
        class: Some(SingularityClass::Pole { order: 2 }),
        regular_radius: Some((1.0 - lambda) / lambda),
        sources: BTreeMap::new(),
    };
    record(
        &mut expected.sources,
        &[
            ("t_minus1", Source::Published),
            ("t_minus2", Source::Published),
            ("t0", Source::Derived),
            ("t_ell", Source::Derived),
            ("p", Source::Published),
            ("q", Source::Published),
            ("class", Source::Published),
            ("regular_radius", Source::Derived),
        ],
    );
    let notes = vec![
        "regular coefficients follow the per-coordinate expansion mu^l/(1-mu)^(l+1), mu = lambda^(j-2); the displayed 1/(1-lambda)^l entries do not satisfy the coefficient recursion".into(),
    ];
    Ok(CorpusEntry { kind, pencil, expected, truncation: Some(n), notes })
}

/// Left-endpoint rectangle discretization of the running integral on [0, 1]:
/// strictly lower triangular with entries 1/n.
pub fn volterra_matrix(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_real_fn(n, n, |i, j| if j < i { 1.0 / n as f64 } else { 0.0 })
}

/// A(z) = I − z(I − V_n).
pub fn make_volterra_example(n: usize) -> Result<CorpusEntry> {
    if n < 8 {
        return Err(Error::InvalidInput(format!("quadrature size must be at least 8, got {n}")));
    }
    let v = volterra_matrix(n);
    let id = ComplexMatrix::identity(n);
    let pencil = LinearPencil::new(v.clone(), -(&id - &v))?;
    let kind = CorpusKind::Volterra { n };
    let mut expected = Expected {
        t_minus1: expected_coefficient(&kind, -1),
        t_minus2: expected_coefficient(&kind, -2),
        t0: Some(ComplexMatrix::zeros(n, n)),
        p: Some(id.clone()),
        q: Some(id),
        class: Some(SingularityClass::EssentialAtTruncation { index: n }),
        regular_radius: Some(f64::INFINITY),
        sources: BTreeMap::new(),
    };
    record(
        &mut expected.sources,
        &[
            ("t_minus1", Source::Published),
            ("t_minus2", Source::Published),
            ("t0", Source::Published),
            ("t_ell", Source::Published),
            ("p", Source::Published),
            ("q", Source::Derived),
            ("class", Source::Derived),
            ("operator_norm", Source::Published),
        ],
    );
    Ok(CorpusEntry { kind, pencil, expected, truncation: Some(n), notes: vec![] })
}

/// Continuous-operator reference values: ‖V‖ = 2/π and the eigenvalues
/// 4/((2k+1)²π²) of V*V.
pub fn volterra_reference_norm() -> f64 {
    2.0 / std::f64::consts::PI
}

pub fn volterra_reference_gram_eigenvalue(k: usize) -> f64 {
    let m = (2 * k + 1) as f64 * std::f64::consts::PI;
    4.0 / (m * m)
}

/// Nilpotent shift with U[i][i+1] = λ_{i+1} (0-based λ list).
pub fn hierarchy_shift(lambdas: &[f64]) -> ComplexMatrix {
    let n = lambdas.len();
    ComplexMatrix::from_real_fn(n, n, |i, j| if j == i + 1 { lambdas[j] } else { 0.0 })
}

fn hierarchy_sigma(lambdas: &[f64]) -> Result<f64> {
    let sigma: f64 = lambdas.iter().sum();
    if lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) || !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::SigmaNotLessThanOne { sigma });
    }
    Ok(sigma)
}

/// The eigenvector v = (−(σI + U)⁻¹λ⃗, 1) with C₀v = σv.
pub fn hierarchy_eigenvector(lambdas: &[f64]) -> Result<ComplexVector> {
    let sigma = hierarchy_sigma(lambdas)?;
    let n = lambdas.len();
    let u = hierarchy_shift(lambdas);
    let m = &ComplexMatrix::identity(n).scale_real(sigma) + &u;
    let inv = m.inverse(1e14, "sigma I + U")?;
    let lam = ComplexVector::from_iterator(n, lambdas.iter().map(|&l| c64(l, 0.0)));
    let top = -inv.mul_vec(&lam);
    let mut v = ComplexVector::zeros(n + 1);
    v.rows_mut(0, n).copy_from(&top);
    v[n] = c64(1.0, 0.0);
    Ok(v)
}

/// (n+1)×(n+1) truncation with C₀ = [[−U, −λ⃗], [0, σ]] and C₁ = I.
pub fn make_hierarchy_example(lambdas: &[f64]) -> Result<CorpusEntry> {
    let sigma = hierarchy_sigma(lambdas)?;
    let n = lambdas.len();
    let u = hierarchy_shift(lambdas);
    let mut c0 = ComplexMatrix::zeros(n + 1, n + 1);
    c0.set_block(0, 0, &-&u);
    for (i, &l) in lambdas.iter().enumerate() {
        c0[(i, n)] = c64(-l, 0.0);
    }
    c0[(n, n)] = c64(sigma, 0.0);
    let pencil = LinearPencil::new(c0, ComplexMatrix::identity(n + 1))?;
    let kind = CorpusKind::Hierarchy { lambdas: lambdas.to_vec() };
    let v = hierarchy_eigenvector(lambdas)?;
    let p_c = ComplexMatrix::from_fn(n + 1, n + 1, |i, j| if j == n { v[i] } else { c64(0.0, 0.0) });
    let p = &ComplexMatrix::identity(n + 1) - &p_c;
    let mut expected = Expected {
        t_minus1: Some(p.clone()),
        t_minus2: expected_coefficient(&kind, -2),
        t0: Some(p_c.scale_real(1.0 / sigma)),
        p: Some(p.clone()),
        q: Some(p),
        class: Some(SingularityClass::Pole { order: n }),
        regular_radius: Some(sigma),
        sources: BTreeMap::new(),
    };
    record(
        &mut expected.sources,
        &[
            ("t_minus1", Source::Published),
            ("t_minus2", Source::Derived),
            ("t0", Source::Published),
            ("t_ell", Source::Published),
            ("p", Source::Published),
            ("q", Source::Derived),
            ("class", Source::Derived),
            ("regular_radius", Source::Published),
        ],
    );
    let notes = vec![format!("sigma = {sigma}; truncated pencil has dimension {}", n + 1)];
    Ok(CorpusEntry { kind, pencil, expected, truncation: Some(n), notes })
}

/// Resolvent of the hierarchy pencil in the variable ζ, by its block formula.
pub fn hierarchy_resolvent(lambdas: &[f64], zeta: num_complex::Complex64) -> Result<ComplexMatrix> {
    let sigma = hierarchy_sigma(lambdas)?;
    let n = lambdas.len();
    let u = hierarchy_shift(lambdas);
    let w = zeta - 1.0;
    let inner = (&ComplexMatrix::identity(n).scale(w) - &u).inverse(1e14, "(zeta-1)I - U")?;
    let lam = ComplexVector::from_iterator(n, lambdas.iter().map(|&l| c64(l, 0.0)));
    let corner = 1.0 / (w + sigma);
    let top_right = inner.mul_vec(&lam) * corner;
    let mut r = ComplexMatrix::zeros(n + 1, n + 1);
    r.set_block(0, 0, &inner);
    for i in 0..n {
        r[(i, n)] = top_right[i];
    }
    r[(n, n)] = corner;
    Ok(r)
}

pub fn hierarchy_geometric(n: usize) -> Vec<f64> {
    (1..=n).map(|k| 0.4 * 0.5f64.powi(k as i32)).collect()
}

/// Closed-form Tⱼ where the example provides one.
pub fn expected_coefficient(kind: &CorpusKind, j: i64) -> Option<ComplexMatrix> {
    match kind {
        CorpusKind::Matrix { eps } => {
            if j == -1 {
                Some(ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[0.0, 0.0]]))
            } else if j < -1 {
                Some(ComplexMatrix::zeros(2, 2))
            } else {
                let s = eps.powi(-(j as i32) - 1);
                Some(ComplexMatrix::from_real_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]).scale_real(s))
            }
        }
        CorpusKind::C0 { lambda, n } => {
            let mut t = ComplexMatrix::zeros(*n, *n);
            match j {
                -1 => t.set_block(0, 0, &ComplexMatrix::from_real_rows(&[&[-1.0, 1.0], &[0.0, -1.0]])),
                -2 => t[(0, 1)] = c64(1.0, 0.0),
                j if j < -2 => {}
                l => {
                    for c in 2..*n {
                        let mu = lambda.powi(c as i32 - 1);
                        t[(c, c)] = c64(mu.powi(l as i32) / (1.0 - mu).powi(l as i32 + 1), 0.0);
                    }
                }
            }
            Some(t)
        }
        CorpusKind::Volterra { n } => {
            if j >= 0 {
                return Some(ComplexMatrix::zeros(*n, *n));
            }
            let k = (-j) as usize;
            let v = volterra_matrix(*n);
            let inv = (&ComplexMatrix::identity(*n) - &v).inverse(1e14, "I - V").ok()?;
            Some(-(&inv * &(&v * &inv).pow(k - 1)))
        }
        CorpusKind::Hierarchy { lambdas } => {
            let entry = make_hierarchy_pencil_parts(lambdas).ok()?;
            let (c0, p, p_c, sigma) = entry;
            if j >= 0 {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                Some(p_c.scale_real(sign * sigma.powi(-(j as i32) - 1)))
            } else {
                let k = (-j) as usize;
                let sign = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
                Some((&(&p * &c0).pow(k - 1) * &p).scale_real(sign))
            }
        }
    }
}

fn make_hierarchy_pencil_parts(lambdas: &[f64]) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix, f64)> {
    let sigma = hierarchy_sigma(lambdas)?;
    let n = lambdas.len();
    let v = hierarchy_eigenvector(lambdas)?;
    let p_c = ComplexMatrix::from_fn(n + 1, n + 1, |i, j| if j == n { v[i] } else { c64(0.0, 0.0) });
    let p = &ComplexMatrix::identity(n + 1) - &p_c;
    let u = hierarchy_shift(lambdas);
    let mut c0 = ComplexMatrix::zeros(n + 1, n + 1);
    c0.set_block(0, 0, &-&u);
    for (i, &l) in lambdas.iter().enumerate() {
        c0[(i, n)] = c64(-l, 0.0);
    }
    c0[(n, n)] = c64(sigma, 0.0);
    Ok((c0, p, p_c, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_example_shapes() {
        let e = make_matrix_example(0.5).unwrap();
        assert_eq!(e.pencil.n, 2);
        assert!(e.expected.t0.as_ref().unwrap().approx_eq(
            &ComplexMatrix::from_real_rows(&[&[2.0, -2.0], &[-2.0, 2.0]]),
            1e-15
        ));
        assert!(make_matrix_example(1.0).unwrap().notes.len() == 1);
        assert!(make_matrix_example(0.0).is_err());
    }

    #[test]
    fn c0_example_pencil_entries() {
        let e = make_c0_example(0.25, 10).unwrap();
        let c0 = &e.pencil.c0;
        assert!((c0[(0, 1)] - c64(-1.0, 0.0)).norm() < 1e-15);
        assert!((c0[(2, 2)] - c64(0.75, 0.0)).norm() < 1e-15);
        assert!((e.expected.regular_radius.unwrap() - 3.0).abs() < 1e-12);
        assert!(make_c0_example(0.25, 3).is_err());
    }

    #[test]
    fn volterra_norm_near_two_over_pi() {
        let v = volterra_matrix(64);
        assert!((v.norm2() - volterra_reference_norm()).abs() < 5e-2);
    }

    #[test]
    fn hierarchy_eigenrelation() {
        let lam = hierarchy_geometric(8);
        let e = make_hierarchy_example(&lam).unwrap();
        let v = hierarchy_eigenvector(&lam).unwrap();
        let sigma: f64 = lam.iter().sum();
        let r = e.pencil.c0.mul_vec(&v) - &v * c64(sigma, 0.0);
        assert!(r.norm() < 1e-12);
        assert!(make_hierarchy_example(&[0.0; 4]).is_err());
        assert!(make_hierarchy_example(&[0.6, 0.5]).is_err());
    }

    #[test]
    fn hierarchy_resolvent_formula() {
        let lam = hierarchy_geometric(8);
        let e = make_hierarchy_example(&lam).unwrap();
        let sigma: f64 = lam.iter().sum();
        let z = c64(1.0, sigma / 2.0);
        let a = hierarchy_resolvent(&lam, z).unwrap();
        let b = e.pencil.solve_at(z, 1e12).unwrap();
        assert!(a.approx_eq(&b, 1e-10));
    }
}
