use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::BasicSolution;
use crate::linalg::{kernel_chain, ComplexMatrix};
use crate::pencil::LinearPencil;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingularityClass {
    Removable,
    Pole { order: usize },
    EssentialAtTruncation { index: usize },
}

impl SingularityClass {
    /// Number of nonzero singular coefficients T₋₁ … T₋d.
    pub fn singular_depth(&self) -> usize {
        match *self {
            SingularityClass::Removable => 0,
            SingularityClass::Pole { order } => order,
            SingularityClass::EssentialAtTruncation { index } => index,
        }
    }
}

impl std::fmt::Display for SingularityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SingularityClass::Removable => write!(f, "removable"),
            SingularityClass::Pole { order } => write!(f, "pole({order})"),
            SingularityClass::EssentialAtTruncation { index } => write!(f, "essential_at_truncation({index})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub class: SingularityClass,
    /// ‖(T₋₁C₀)ᵏ‖₂ for k = 1..=k_max.
    pub norms: Vec<f64>,
    /// dim ker((T₋₁C₀)ᵏ) for k = 1, 2, ….
    pub kernel_dims: Vec<usize>,
    /// Nilpotency index of C₀T₋₁, which must match that of T₋₁C₀.
    pub right_index: Option<usize>,
}

fn index_of(m: &ComplexMatrix, scale: f64, tol: f64, k_max: usize) -> Option<usize> {
    kernel_chain(m, tol * scale, k_max).nilpotency_index(m.rows())
}

/// Pole order as the nilpotency index of T₋₁C₀.
///
/// The index is read off the growth of ker((T₋₁C₀)ᵏ) rather than the decay of
/// ‖(T₋₁C₀)ᵏ‖: powers of a large nilpotent matrix can become tiny long before
/// they vanish, which would understate the index.
pub fn classify_singularity(basic: &BasicSolution, pencil: &LinearPencil, k_max: usize, tol: f64) -> Result<ClassificationReport> {
    let n = pencil.n;
    let scale_t = basic.t0.norm2().max(1.0);
    let n_op = basic.singular_operator(pencil);
    let mut norms = Vec::with_capacity(k_max);
    let mut pw = n_op.clone();
    for k in 1..=k_max {
        norms.push(pw.norm2());
        if k < k_max {
            pw = &pw * &n_op;
        }
    }
    if basic.t_minus1.norm2() <= tol * scale_t {
        return Ok(ClassificationReport { class: SingularityClass::Removable, norms, kernel_dims: vec![], right_index: None });
    }
    let scale = (basic.t_minus1.norm2() * pencil.c0.norm2()).max(f64::MIN_POSITIVE);
    let chain = kernel_chain(&n_op, tol * scale, k_max.max(1));
    let right_index = index_of(&(&pencil.c0 * &basic.t_minus1), scale, tol, k_max.max(1));
    let index = match chain.nilpotency_index(n) {
        Some(i) => i,
        None => {
            let plateau = norms.last().copied().unwrap_or(0.0);
            return Err(Error::Inconclusive { k_max, plateau });
        }
    };
    let class = if index == n && n > 1 {
        SingularityClass::EssentialAtTruncation { index }
    } else {
        SingularityClass::Pole { order: index }
    };
    Ok(ClassificationReport { class, norms, kernel_dims: chain.dims, right_index })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gr_ex_is_simple_pole() {
        let a0 = ComplexMatrix::from_real_rows(&[&[1.0, -0.5], &[1.0, 1.0]]);
        let a1 = ComplexMatrix::from_real_rows(&[&[-1.0, 0.0], &[-1.0, -1.0]]);
        let p = LinearPencil::from_a(a0, a1).unwrap();
        let b = BasicSolution {
            t_minus1: ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[0.0, 0.0]]),
            t0: ComplexMatrix::from_real_rows(&[&[2.0, -2.0], &[-2.0, 2.0]]),
        };
        let rep = classify_singularity(&b, &p, 4, 1e-9).unwrap();
        assert_eq!(rep.class, SingularityClass::Pole { order: 1 });
        assert_eq!(rep.right_index, Some(1));
    }

    #[test]
    fn identity_is_removable() {
        let p = LinearPencil::identity(2);
        let b = BasicSolution { t_minus1: ComplexMatrix::zeros(2, 2), t0: ComplexMatrix::identity(2) };
        let rep = classify_singularity(&b, &p, 2, 1e-9).unwrap();
        assert_eq!(rep.class, SingularityClass::Removable);
    }

    #[test]
    fn non_nilpotent_is_inconclusive() {
        let p = LinearPencil::new(ComplexMatrix::identity(2), ComplexMatrix::identity(2)).unwrap();
        let b = BasicSolution { t_minus1: ComplexMatrix::identity(2), t0: ComplexMatrix::zeros(2, 2) };
        assert!(matches!(classify_singularity(&b, &p, 4, 1e-9), Err(Error::Inconclusive { .. })));
    }

    #[test]
    fn display_forms() {
        assert_eq!(SingularityClass::Pole { order: 2 }.to_string(), "pole(2)");
        assert_eq!(SingularityClass::EssentialAtTruncation { index: 64 }.to_string(), "essential_at_truncation(64)");
    }
}
