use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};

/// The affine map z ↦ A(z) = C₀ + C₁(z − 1) with square coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearPencil {
    pub n: usize,
    pub c0: ComplexMatrix,
    pub c1: ComplexMatrix,
}

#[derive(Deserialize)]
struct RawPencil {
    n: usize,
    c0: ComplexMatrix,
    c1: ComplexMatrix,
}

impl<'de> Deserialize<'de> for LinearPencil {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawPencil::deserialize(d)?;
        let p = LinearPencil::new(raw.c0, raw.c1).map_err(serde::de::Error::custom)?;
        if p.n != raw.n {
            return Err(serde::de::Error::custom(format!("declared n = {} but matrices are {}x{}", raw.n, p.n, p.n)));
        }
        Ok(p)
    }
}

impl LinearPencil {
    pub fn new(c0: ComplexMatrix, c1: ComplexMatrix) -> Result<Self> {
        if !c0.is_square() || c0.rows() != c1.rows() || c0.cols() != c1.cols() {
            return Err(Error::ShapeMismatch(format!(
                "c0 is {}x{}, c1 is {}x{}; both must be square and equal",
                c0.rows(),
                c0.cols(),
                c1.rows(),
                c1.cols()
            )));
        }
        if !c0.is_finite() || !c1.is_finite() {
            return Err(Error::InvalidInput("non-finite pencil entry".into()));
        }
        Ok(Self { n: c0.rows(), c0, c1 })
    }

    /// Pencil from the coefficients of A(z) = A₀ + A₁z.
    pub fn from_a(a0: ComplexMatrix, a1: ComplexMatrix) -> Result<Self> {
        let c0 = &a0 + &a1;
        Self::new(c0, a1)
    }

    pub fn identity(n: usize) -> Self {
        Self { n, c0: ComplexMatrix::identity(n), c1: ComplexMatrix::zeros(n, n) }
    }

    pub fn a0(&self) -> ComplexMatrix {
        &self.c0 - &self.c1
    }

    pub fn a1(&self) -> ComplexMatrix {
        self.c1.clone()
    }

    pub fn evaluate(&self, z: Complex64) -> ComplexMatrix {
        &self.c0 + &self.c1.scale(z - 1.0)
    }

    /// R(z) = A(z)⁻¹, refused when the condition estimate exceeds `cond_cap`.
    pub fn solve_at(&self, z: Complex64, cond_cap: f64) -> Result<ComplexMatrix> {
        self.evaluate(z)
            .inverse_checked(cond_cap)
            .map(|(inv, _)| inv)
            .map_err(|cond| Error::SingularAtPoint { z, cond })
    }

    /// Dimension-independent measure of the pencil's size, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.c0.norm1().max(self.c1.norm1()).max(f64::MIN_POSITIVE)
    }
}

/// log|det A(z)| and arg det A(z) from an LU factorization; `None` when a
/// pivot vanishes exactly.
pub(crate) fn log_det(a: &ComplexMatrix) -> Option<Complex64> {
    let n = a.rows();
    let lu = a.0.clone().lu();
    let u = lu.u();
    let mut acc = c64(0.0, 0.0);
    for i in 0..n {
        let d = u[(i, i)];
        if d == Complex64::ZERO || !d.re.is_finite() || !d.im.is_finite() {
            return None;
        }
        acc += d.ln();
    }
    if lu.p().determinant::<f64>() < 0.0 {
        acc += c64(0.0, std::f64::consts::PI);
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gr_ex(eps: f64) -> LinearPencil {
        let a0 = ComplexMatrix::from_real_rows(&[&[1.0, -eps], &[1.0, 1.0]]);
        let a1 = ComplexMatrix::from_real_rows(&[&[-1.0, 0.0], &[-1.0, -1.0]]);
        LinearPencil::from_a(a0, a1).unwrap()
    }

    #[test]
    fn evaluate_at_one_and_zero() {
        let p = gr_ex(0.5);
        let c0 = ComplexMatrix::from_real_rows(&[&[0.0, -0.5], &[0.0, 0.0]]);
        assert!(p.evaluate(c64(1.0, 0.0)).approx_eq(&c0, 1e-15));
        let a0 = ComplexMatrix::from_real_rows(&[&[1.0, -0.5], &[1.0, 1.0]]);
        assert!(p.evaluate(c64(0.0, 0.0)).approx_eq(&a0, 1e-15));
    }

    #[test]
    fn solve_at_closed_form() {
        let p = gr_ex(0.5);
        let r = p.solve_at(c64(1.25, 0.0), 1e12).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[4.0, -8.0], &[-4.0, 4.0]]);
        assert!(r.approx_eq(&expected, 1e-12));
        assert!(matches!(p.solve_at(c64(1.0, 0.0), 1e12), Err(Error::SingularAtPoint { .. })));
    }

    #[test]
    fn identity_pencil_resolvent() {
        let p = LinearPencil::identity(3);
        let r = p.solve_at(c64(0.3, 2.0), 1e12).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::identity(3), 1e-15));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let r = LinearPencil::new(ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(3, 3));
        assert!(matches!(r, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn json_roundtrip_and_n_check() {
        let p = gr_ex(0.5);
        let s = serde_json::to_string(&p).unwrap();
        let q: LinearPencil = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = s.replacen("\"n\":2", "\"n\":3", 1);
        assert!(serde_json::from_str::<LinearPencil>(&bad).is_err());
    }

    #[test]
    fn log_det_phase() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let ld = log_det(&a).unwrap();
        assert!(ld.re.abs() < 1e-15);
        assert!((ld.exp() - c64(-1.0, 0.0)).norm() < 1e-14);
    }
}
