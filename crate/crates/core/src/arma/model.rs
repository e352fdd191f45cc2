use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vector_serde, ComplexMatrix, ComplexVector};
use crate::pencil::LinearPencil;

use super::noise::{NoiseSpec, Trajectory};

/// A₀x(t) + A₁x(t−1) = F₀n(t) + F₁n(t−1) with x(−1) = c.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaModel {
    pub a0: ComplexMatrix,
    pub a1: ComplexMatrix,
    pub f0: ComplexMatrix,
    pub f1: ComplexMatrix,
    pub c: ComplexVector,
    a0_inv: ComplexMatrix,
}

impl ArmaModel {
    pub fn new(a0: ComplexMatrix, a1: ComplexMatrix, f0: ComplexMatrix, f1: ComplexMatrix, c: ComplexVector) -> Result<Self> {
        let n = a0.rows();
        let square = |m: &ComplexMatrix| m.rows() == n && m.cols() == n;
        if !square(&a0) || !square(&a1) {
            return Err(Error::ShapeMismatch(format!("A0 and A1 must be {n}x{n}")));
        }
        if f0.rows() != n || f1.rows() != n || f0.cols() != f1.cols() {
            return Err(Error::ShapeMismatch("F0 and F1 must have n rows and a common column count".into()));
        }
        if c.len() != n {
            return Err(Error::ShapeMismatch(format!("initial value has length {}, expected {n}", c.len())));
        }
        let a0_inv = a0.inverse_checked(1e12).map_err(|_| Error::SingularA0)?.0;
        Ok(Self { a0, a1, f0, f1, c, a0_inv })
    }

    /// Model whose characteristic pencil is `pencil`, i.e. A₀ = C₀ − C₁, A₁ = C₁.
    pub fn from_pencil(pencil: &LinearPencil, f0: ComplexMatrix, f1: ComplexMatrix, c: ComplexVector) -> Result<Self> {
        Self::new(pencil.a0(), pencil.a1(), f0, f1, c)
    }

    /// F₀ = I, F₁ = `f1_scale`·I, zero initial value.
    pub fn with_scalar_ma(pencil: &LinearPencil, f1_scale: f64) -> Result<Self> {
        let n = pencil.n;
        Self::from_pencil(
            pencil,
            ComplexMatrix::identity(n),
            ComplexMatrix::identity(n).scale_real(f1_scale),
            ComplexVector::zeros(n),
        )
    }

    pub fn dim(&self) -> usize {
        self.a0.rows()
    }

    pub fn noise_dim(&self) -> usize {
        self.f0.cols()
    }

    pub fn pencil(&self) -> LinearPencil {
        LinearPencil::from_a(self.a0.clone(), self.a1.clone()).expect("validated shapes")
    }

    pub fn a0_inv(&self) -> &ComplexMatrix {
        &self.a0_inv
    }

    pub fn with_initial(mut self, c: ComplexVector) -> Result<Self> {
        if c.len() != self.dim() {
            return Err(Error::ShapeMismatch("initial value length".into()));
        }
        self.c = c;
        Ok(self)
    }
}

/// g(t) = F₀n(t) + F₁n(t−1) on [t_start + 1, t_end] of the noise path.
pub fn ma1_g(model: &ArmaModel, noise: &Trajectory) -> Result<Trajectory> {
    if noise.dim() != model.noise_dim() {
        return Err(Error::ShapeMismatch(format!("noise dimension {} but F has {} columns", noise.dim(), model.noise_dim())));
    }
    let start = noise.t_start + 1;
    let values = (start..=noise.t_end())
        .map(|t| Ok(model.f0.mul_vec(noise.get(t)?) + model.f1.mul_vec(noise.get(t - 1)?)))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::IndexOutOfRange { t: start, start: noise.t_start, end: noise.t_end() });
    }
    Ok(Trajectory::new(start, values))
}

/// x(−1) = c and x(t) = A₀⁻¹(g(t) − A₁x(t−1)) for 0 ≤ t ≤ t_end.
pub fn simulate_recursion(model: &ArmaModel, g: &Trajectory, t_end: i64) -> Result<Trajectory> {
    let mut values = Vec::with_capacity((t_end + 2).max(1) as usize);
    values.push(model.c.clone());
    for t in 0..=t_end {
        let prev = values.last().unwrap();
        let rhs = g.get(t)? - model.a1.mul_vec(prev);
        values.push(model.a0_inv.mul_vec(&rhs));
    }
    Ok(Trajectory::new(-1, values))
}

/// JSON form: the characteristic pencil plus MA coefficients, initial value
/// and noise specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub pencil: LinearPencil,
    pub f0: ComplexMatrix,
    pub f1: ComplexMatrix,
    #[serde(with = "vector_serde")]
    pub c: ComplexVector,
    pub noise: NoiseSpec,
}

impl ModelSpec {
    pub fn model(&self) -> Result<ArmaModel> {
        ArmaModel::from_pencil(&self.pencil, self.f0.clone(), self.f1.clone(), self.c.clone())
    }

    pub fn from_model(model: &ArmaModel, noise: NoiseSpec) -> Self {
        Self { pencil: model.pencil(), f0: model.f0.clone(), f1: model.f1.clone(), c: model.c.clone(), noise }
    }
}

/// Real vector as a complex vector.
pub fn cvec(values: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)))
}
