//! Dense complex matrices and the handful of factorizations the analysis needs.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type ComplexVector = DVector<Complex64>;

pub const fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix. Entries are stored column-major by nalgebra but all
/// constructors and the JSON form use row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(pub DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_real_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn(rows, cols, |i, j| c64(f(i, j), 0.0))
    }

    /// Builds a matrix from real rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_real_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn from_diagonal(d: &[Complex64]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i] } else { Complex64::ZERO })
    }

    pub fn from_columns(rows: usize, cols: &[ComplexVector]) -> Self {
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self[(i, j)]).collect())
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        self.0.column(j).into_owned()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c64(s, 0.0))
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        &self.0 * v
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        self.0
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value).
    pub fn norm2(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.0.shape() == other.0.shape() && self.max_abs_diff(other) <= tol
    }

    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self(self.0.view((r0, c0), (rows, cols)).into_owned())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        self.0.view_mut((r0, c0), (b.rows(), b.cols())).copy_from(&b.0);
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.0.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Inverse through LU together with the 1-norm condition estimate.
    /// Fails when the matrix is singular or the estimate exceeds `cond_cap`.
    pub fn inverse_checked(&self, cond_cap: f64) -> std::result::Result<(Self, f64), f64> {
        assert!(self.is_square());
        let n = self.rows();
        if n == 0 {
            return Ok((Self::zeros(0, 0), 1.0));
        }
        let norm = self.norm1();
        let inv = match self.0.clone().lu().try_inverse() {
            Some(inv) => Self(inv),
            None => return Err(f64::INFINITY),
        };
        if !inv.is_finite() {
            return Err(f64::INFINITY);
        }
        let cond = norm * inv.norm1();
        if !(cond <= cond_cap) {
            return Err(cond);
        }
        Ok((inv, cond))
    }

    pub fn inverse(&self, cond_cap: f64, which: &'static str) -> Result<Self> {
        self.inverse_checked(cond_cap)
            .map(|(inv, _)| inv)
            .map_err(|_| Error::SingularInnerMatrix { which })
    }

    /// Minimum-norm least-squares solution of `self * x = b` and the residual norm.
    pub fn lstsq(&self, b: &ComplexVector, rel_tol: f64) -> (ComplexVector, f64) {
        let m = self.rows();
        let n = self.cols();
        if n == 0 {
            return (ComplexVector::zeros(0), b.norm());
        }
        let svd = padded_svd(&self.0);
        let u = svd.u.as_ref().unwrap();
        let v_t = svd.v_t.as_ref().unwrap();
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let cut = rel_tol * smax.max(f64::MIN_POSITIVE);
        let mut bp = ComplexVector::zeros(u.nrows());
        bp.rows_mut(0, m).copy_from(b);
        let mut x = ComplexVector::zeros(n);
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > cut {
                let coef = u.column(k).dotc(&bp) / s;
                x += v_t.row(k).adjoint() * coef;
            }
        }
        let r = (&self.0 * &x - b).norm();
        (x, r)
    }

    /// Moore–Penrose pseudo-inverse with singular values below
    /// `rel_tol · σ_max` treated as zero.
    pub fn pseudo_inverse(&self, rel_tol: f64) -> Self {
        let (m, n) = (self.rows(), self.cols());
        if m == 0 || n == 0 {
            return Self::zeros(n, m);
        }
        let svd = padded_svd(&self.0);
        let u = svd.u.as_ref().unwrap();
        let v_t = svd.v_t.as_ref().unwrap();
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let cut = rel_tol * smax.max(f64::MIN_POSITIVE);
        let mut out = DMatrix::zeros(n, m);
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > cut {
                let uk = u.column(k).rows(0, m).adjoint();
                out += v_t.row(k).adjoint() * uk * Complex64::new(1.0 / s, 0.0);
            }
        }
        Self(out)
    }

    /// Orthonormal basis of the null space: right singular vectors whose
    /// singular values do not exceed `abs_tol`.
    pub fn kernel(&self, abs_tol: f64) -> Self {
        let n = self.cols();
        if n == 0 {
            return Self::zeros(0, 0);
        }
        if self.rows() == 0 {
            return Self::identity(n);
        }
        let svd = padded_svd(&self.0);
        let v_t = svd.v_t.as_ref().unwrap();
        let cols: Vec<ComplexVector> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s <= abs_tol)
            .map(|(k, _)| v_t.row(k).adjoint())
            .collect();
        Self::from_columns(n, &cols)
    }

    /// Orthonormal basis of the column space: left singular vectors whose
    /// singular values exceed `abs_tol`.
    pub fn range(&self, abs_tol: f64) -> Self {
        let m = self.rows();
        if self.cols() == 0 || m == 0 {
            return Self::zeros(m, 0);
        }
        let svd = self.0.clone().svd(true, false);
        let u = svd.u.as_ref().unwrap();
        let cols: Vec<ComplexVector> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s > abs_tol)
            .map(|(k, _)| u.column(k).into_owned())
            .collect();
        Self::from_columns(m, &cols)
    }

    /// The `k` leading left singular vectors.
    pub fn leading_left_singular(&self, k: usize) -> Self {
        let m = self.rows();
        if k == 0 {
            return Self::zeros(m, 0);
        }
        let svd = self.0.clone().svd(true, false);
        let u = svd.u.as_ref().unwrap();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let cols: Vec<ComplexVector> = order.iter().take(k).map(|&i| u.column(i).into_owned()).collect();
        Self::from_columns(m, &cols)
    }

    pub fn rank(&self, abs_tol: f64) -> usize {
        self.singular_values().iter().filter(|&&s| s > abs_tol).count()
    }
}

/// SVD of `a` padded with zero rows to at least square, so that V is complete.
fn padded_svd(a: &DMatrix<Complex64>) -> nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn> {
    let (m, n) = a.shape();
    if m >= n {
        a.clone().svd(true, true)
    } else {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p.svd(true, true)
    }
}

/// Orthonormal basis of the space the columns of `m` span.
pub fn orthonormalize(m: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    let scale = m.norm2();
    m.range(rel_tol * scale.max(f64::MIN_POSITIVE))
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal bases. Returns 1 when dimensions differ.
pub fn subspace_gap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.cols() != b.cols() {
        return 1.0;
    }
    if a.cols() == 0 {
        return 0.0;
    }
    let proj = &(b * &b.adjoint()) * a;
    (a - &proj).norm2().min(1.0)
}

/// Largest principal angle in radians; π/2 when dimensions differ.
pub fn max_principal_angle(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.cols() != b.cols() {
        return std::f64::consts::FRAC_PI_2;
    }
    subspace_gap(a, b).asin()
}

/// Dimensions of ker(M), ker(M²), … built by successive preimages,
/// `K_k = ker((I − S Sᴴ) M)` with `S` an orthonormal basis of `K_{k−1}`.
/// Stops once the dimension stalls or reaches n, or after `max_steps`.
#[derive(Debug, Clone)]
pub struct KernelChain {
    pub dims: Vec<usize>,
    pub basis: ComplexMatrix,
}

impl KernelChain {
    /// Smallest k with dim ker(Mᵏ) = n.
    pub fn nilpotency_index(&self, n: usize) -> Option<usize> {
        if n == 0 {
            return Some(0);
        }
        self.dims.iter().position(|&d| d == n).map(|i| i + 1)
    }

    pub fn stabilized_dim(&self) -> usize {
        self.dims.last().copied().unwrap_or(0)
    }
}

pub fn kernel_chain(m: &ComplexMatrix, abs_tol: f64, max_steps: usize) -> KernelChain {
    let n = m.rows();
    let mut basis = ComplexMatrix::zeros(n, 0);
    let mut dims = Vec::new();
    for _ in 0..max_steps {
        let projected = if basis.cols() == 0 {
            m.clone()
        } else {
            &(&ComplexMatrix::identity(n) - &(&basis * &basis.adjoint())) * m
        };
        let next = projected.kernel(abs_tol);
        let d = next.cols();
        let prev = basis.cols();
        if d <= prev {
            if dims.is_empty() {
                dims.push(d);
            }
            break;
        }
        basis = next;
        dims.push(d);
        if d == n {
            break;
        }
    }
    KernelChain { dims, basis }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| c64(re, im)).collect())
            .collect();
        let m = ComplexMatrix::from_rows(&rows).map_err(serde::de::Error::custom)?;
        if !m.is_finite() {
            return Err(serde::de::Error::custom("non-finite matrix entry"));
        }
        Ok(m)
    }
}

/// Serde helpers for complex vectors as `[[re, im], …]`.
pub mod vector_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &ComplexVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexVector, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(ComplexVector::from_iterator(pairs.len(), pairs.into_iter().map(|[re, im]| c64(re, im))))
    }
}

pub fn unit_vector(n: usize, k: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(n);
    v[k] = Complex64::ONE;
    v
}
