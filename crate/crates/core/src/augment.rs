//! Polynomial pencils, their block augmentation to linear pencils, and the
//! reduction of ARMA(p, q) to block ARMA(1, 1).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arma::model::ArmaModel;
use crate::arma::noise::Trajectory;
use crate::contour::ContourOracle;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::pencil::LinearPencil;
use crate::tolerances::Tolerances;

/// C(z) = Σⱼ Cⱼ(z − 1)ʲ, j = 0..=degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialPencil {
    pub n: usize,
    pub degree: usize,
    pub coefficients: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct RawPolynomial {
    n: usize,
    degree: usize,
    coefficients: Vec<ComplexMatrix>,
}

impl<'de> Deserialize<'de> for PolynomialPencil {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawPolynomial::deserialize(d)?;
        let p = PolynomialPencil::new(raw.coefficients).map_err(serde::de::Error::custom)?;
        if p.n != raw.n || p.degree != raw.degree {
            return Err(serde::de::Error::custom(format!(
                "declared n = {}, degree = {} but coefficients give n = {}, degree = {}",
                raw.n, raw.degree, p.n, p.degree
            )));
        }
        Ok(p)
    }
}

impl PolynomialPencil {
    pub fn new(coefficients: Vec<ComplexMatrix>) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::InvalidInput("a polynomial pencil needs degree at least 1".into()));
        }
        let n = coefficients[0].rows();
        if coefficients.iter().any(|c| c.rows() != n || c.cols() != n) {
            return Err(Error::ShapeMismatch(format!("all coefficients must be {n}x{n}")));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        Ok(Self { n, degree: coefficients.len() - 1, coefficients })
    }

    pub fn from_linear(p: &LinearPencil) -> Self {
        Self { n: p.n, degree: 1, coefficients: vec![p.c0.clone(), p.c1.clone()] }
    }

    /// Re-expands Σᵢ Aᵢzⁱ around z = 1: Cⱼ = Σᵢ binom(i, j)Aᵢ.
    pub fn from_lag_polynomial(a: &[ComplexMatrix]) -> Result<Self> {
        let p = a.len().saturating_sub(1);
        let n = a.first().map_or(0, |m| m.rows());
        let coefficients = (0..=p)
            .map(|j| {
                a.iter().enumerate().skip(j).fold(ComplexMatrix::zeros(n, n), |acc, (i, ai)| {
                    acc + ai.scale_real(crate::arma::difference::binomial(i as u64, j as u64))
                })
            })
            .collect();
        Self::new(coefficients)
    }

    pub fn coefficient(&self, j: i64) -> Option<&ComplexMatrix> {
        usize::try_from(j).ok().and_then(|j| self.coefficients.get(j))
    }

    pub fn evaluate(&self, z: Complex64) -> ComplexMatrix {
        let w = z - 1.0;
        self.coefficients
            .iter()
            .rev()
            .fold(ComplexMatrix::zeros(self.n, self.n), |acc, c| &acc.scale(w) + c)
    }

    pub fn solve_at(&self, z: Complex64, cond_cap: f64) -> Result<ComplexMatrix> {
        self.evaluate(z)
            .inverse_checked(cond_cap)
            .map(|(inv, _)| inv)
            .map_err(|cond| Error::SingularAtPoint { z, cond })
    }

    /// Contour oracle for the Laurent coefficients of C(z)⁻¹ at z = 1.
    pub fn oracle(&self, radius: f64, nodes: usize, tol: &Tolerances) -> Result<ContourOracle> {
        ContourOracle::from_solver(radius, nodes, tol, |z| self.solve_at(z, tol.cond_cap))
    }

    /// Random coefficients with C₀ of rank n − 1, so that z = 1 is a singular point.
    pub fn engineered_unit_root(n: usize, degree: usize, seed: u64) -> Result<Self> {
        if n < 1 || degree < 1 {
            return Err(Error::InvalidInput("need n ≥ 1 and degree ≥ 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut random = |rows: usize, cols: usize| ComplexMatrix::from_real_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
        let c0 = &random(n, n - 1) * &random(n - 1, n);
        let mut coefficients = vec![if n == 1 { ComplexMatrix::zeros(1, 1) } else { c0 }];
        for _ in 0..degree {
            coefficients.push(random(n, n));
        }
        Self::new(coefficients)
    }
}

/// The linear pencil 𝒞₀ + 𝒞₁ω in ω = (z − 1)^p whose resolvent has Laurent
/// coefficients 𝒯ⱼ with block (a, b) equal to T_{jp+a−b}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedPencil {
    pub n: usize,
    pub degree: usize,
    pub script_c0: ComplexMatrix,
    pub script_c1: ComplexMatrix,
}

impl AugmentedPencil {
    /// As a linear pencil in the variable 1 + ω.
    pub fn as_linear(&self) -> LinearPencil {
        LinearPencil::new(self.script_c0.clone(), self.script_c1.clone()).expect("square blocks")
    }
}

/// 𝒞₀(i, j) = C_{i−j} for i ≥ j and 𝒞₁(i, j) = C_{p−(j−i)} for j ≥ i.
pub fn augment(poly: &PolynomialPencil) -> AugmentedPencil {
    let (n, p) = (poly.n, poly.degree);
    let mut c0 = ComplexMatrix::zeros(n * p, n * p);
    let mut c1 = ComplexMatrix::zeros(n * p, n * p);
    for i in 0..p {
        for j in 0..p {
            if i >= j {
                c0.set_block(i * n, j * n, &poly.coefficients[i - j]);
            }
            if j >= i {
                c1.set_block(i * n, j * n, &poly.coefficients[p - (j - i)]);
            }
        }
    }
    AugmentedPencil { n, degree: p, script_c0: c0, script_c1: c1 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnpackedLaurent {
    pub coefficients: BTreeMap<i64, ComplexMatrix>,
    /// Largest disagreement between repeated appearances of one index.
    pub disagreement: f64,
}

/// Reads T_k off the blocks of the augmented coefficients 𝒯ⱼ and checks that
/// every appearance of the same k agrees within `tol`.
pub fn unpack_laurent(aug: &BTreeMap<i64, ComplexMatrix>, n: usize, p: usize, tol: f64) -> Result<UnpackedLaurent> {
    let mut seen: BTreeMap<i64, ComplexMatrix> = BTreeMap::new();
    let mut disagreement: f64 = 0.0;
    for (&j, m) in aug {
        if m.rows() != n * p || m.cols() != n * p {
            return Err(Error::ShapeMismatch(format!("augmented coefficient {j} is not {0}x{0}", n * p)));
        }
        for a in 0..p {
            for b in 0..p {
                let k = j * p as i64 + a as i64 - b as i64;
                let block = m.block(a * n, b * n, n, n);
                if let Some(prev) = seen.get(&k) {
                    let d = prev.max_abs_diff(&block) / prev.max_abs().max(1.0);
                    if !(d <= tol) {
                        return Err(Error::BlockInconsistent { index: k, disagreement: d });
                    }
                    disagreement = disagreement.max(d);
                } else {
                    seen.insert(k, block);
                }
            }
        }
    }
    Ok(UnpackedLaurent { coefficients: seen, disagreement })
}

/// max over j of the residuals of Σᵢ CᵢT_{j−i} = δⱼ₀I and Σᵢ T_{j−i}Cᵢ = δⱼ₀I,
/// over those j whose terms are all present in `coefs`, each relative to
/// 1 + n·Σᵢ max|Cᵢ|·max|T_{j−i}|.
pub fn polynomial_fundamental_residual(poly: &PolynomialPencil, coefs: &BTreeMap<i64, ComplexMatrix>) -> f64 {
    let (Some(&lo), Some(&hi)) = (coefs.keys().next(), coefs.keys().next_back()) else {
        return f64::INFINITY;
    };
    let p = poly.degree as i64;
    let mut worst: f64 = 0.0;
    for j in (lo + p)..=hi {
        let mut left = if j == 0 { -ComplexMatrix::identity(poly.n) } else { ComplexMatrix::zeros(poly.n, poly.n) };
        let mut right = left.clone();
        let mut scale: f64 = 1.0;
        for (i, c) in poly.coefficients.iter().enumerate() {
            let t = &coefs[&(j - i as i64)];
            left = left + c * t;
            right = right + t * c;
            scale += c.max_abs() * t.max_abs() * poly.n as f64;
        }
        worst = worst.max(left.max_abs() / scale).max(right.max_abs() / scale);
    }
    worst
}

/// Σᵢ Aᵢx(t − i) = Σⱼ Fⱼn(t − j) with x(−r), …, x(−1) given, r = max(p, q).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaPq {
    pub a: Vec<ComplexMatrix>,
    pub f: Vec<ComplexMatrix>,
    /// x(−r), …, x(−1).
    #[serde(with = "crate::arma::noise::vec_serde")]
    pub initial: Vec<ComplexVector>,
}

impl ArmaPq {
    pub fn new(a: Vec<ComplexMatrix>, f: Vec<ComplexMatrix>, initial: Vec<ComplexVector>) -> Result<Self> {
        if a.is_empty() || f.is_empty() {
            return Err(Error::ShapeMismatch("need A₀ and F₀".into()));
        }
        let n = a[0].rows();
        let k = f[0].cols();
        if a.iter().any(|m| m.rows() != n || m.cols() != n) || f.iter().any(|m| m.rows() != n || m.cols() != k) {
            return Err(Error::ShapeMismatch("inconsistent coefficient shapes".into()));
        }
        let r = (a.len() - 1).max(f.len() - 1).max(1);
        if initial.len() != r || initial.iter().any(|v| v.len() != n) {
            return Err(Error::ShapeMismatch(format!("need {r} initial values of length {n}")));
        }
        Ok(Self { a, f, initial })
    }

    pub fn p(&self) -> usize {
        self.a.len() - 1
    }

    pub fn q(&self) -> usize {
        self.f.len() - 1
    }

    pub fn block_len(&self) -> usize {
        self.p().max(self.q()).max(1)
    }

    pub fn dim(&self) -> usize {
        self.a[0].rows()
    }

    pub fn noise_dim(&self) -> usize {
        self.f[0].cols()
    }
}

/// Direct recursion; `noise` must cover [−r, t_end]. Returns x on [−r, t_end].
pub fn simulate_arma_pq(model: &ArmaPq, noise: &Trajectory, t_end: i64) -> Result<Trajectory> {
    let r = model.block_len() as i64;
    let a0_inv = model.a[0].inverse(1e12, "A_0")?;
    let mut values = model.initial.clone();
    for t in 0..=t_end {
        let mut rhs = ComplexVector::zeros(model.dim());
        for (j, fj) in model.f.iter().enumerate() {
            rhs += fj.mul_vec(noise.get(t - j as i64)?);
        }
        for (i, ai) in model.a.iter().enumerate().skip(1) {
            rhs -= ai.mul_vec(&values[(t + r - i as i64) as usize]);
        }
        values.push(a0_inv.mul_vec(&rhs));
    }
    Ok(Trajectory::new(-r, values))
}

fn block_pair(coefs: &[ComplexMatrix], r: usize, rows: usize, cols: usize) -> (ComplexMatrix, ComplexMatrix) {
    let get = |i: usize| coefs.get(i).cloned().unwrap_or_else(|| ComplexMatrix::zeros(rows, cols));
    let mut m0 = ComplexMatrix::zeros(rows * r, cols * r);
    let mut m1 = ComplexMatrix::zeros(rows * r, cols * r);
    for i in 0..r {
        for j in 0..r {
            if i >= j {
                m0.set_block(i * rows, j * cols, &get(i - j));
            }
            if j >= i {
                m1.set_block(i * rows, j * cols, &get(r - (j - i)));
            }
        }
    }
    (m0, m1)
}

/// Block ARMA(1, 1) for y(s) = (x(rs), …, x(rs + r − 1)) driven by
/// ν(s) = (n(rs), …, n(rs + r − 1)), with y(−1) = (x(−r), …, x(−1)).
pub fn reduce_arma(model: &ArmaPq) -> Result<ArmaModel> {
    let r = model.block_len();
    let (n, k) = (model.dim(), model.noise_dim());
    let (a0, a1) = block_pair(&model.a, r, n, n);
    let (f0, f1) = block_pair(&model.f, r, n, k);
    let mut c = ComplexVector::zeros(n * r);
    for (i, v) in model.initial.iter().enumerate() {
        c.rows_mut(i * n, n).copy_from(v);
    }
    ArmaModel::new(a0, a1, f0, f1, c)
}

/// Groups consecutive values in blocks of r starting at times rs, s ≥ s_start.
pub fn stack(path: &Trajectory, r: usize, s_start: i64, s_end: i64) -> Result<Trajectory> {
    let r_i = r as i64;
    let values = (s_start..=s_end)
        .map(|s| {
            let parts = (0..r_i).map(|a| path.get(r_i * s + a).cloned()).collect::<Result<Vec<_>>>()?;
            let dim = parts[0].len();
            let mut v = ComplexVector::zeros(dim * r);
            for (a, part) in parts.iter().enumerate() {
                v.rows_mut(a * dim, dim).copy_from(part);
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory::new(s_start, values))
}

/// Inverse of [`stack`].
pub fn unstack(path: &Trajectory, r: usize) -> Trajectory {
    let dim = path.dim() / r;
    let values = path
        .values
        .iter()
        .flat_map(|v| (0..r).map(move |a| v.rows(a * dim, dim).into_owned()))
        .collect();
    Trajectory::new(path.t_start * r as i64, values)
}
