//! Empirical integration order of linear functionals of simulated paths.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{singular_coefficients, BasicSolution};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::pencil::LinearPencil;

use super::model::{ma1_g, simulate_recursion, ArmaModel};
use super::noise::{simulate_noise, NoiseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntegrationOrder {
    #[serde(rename = "I(0)")]
    I0,
    #[serde(rename = "I(1)")]
    I1,
    #[serde(rename = "I(2)")]
    I2,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl IntegrationOrder {
    pub fn from_order(d: usize) -> Self {
        match d {
            0 => Self::I0,
            1 => Self::I1,
            2 => Self::I2,
            _ => Self::Unclassified,
        }
    }
}

impl fmt::Display for IntegrationOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::I0 => f.write_str("I(0)"),
            Self::I1 => f.write_str("I(1)"),
            Self::I2 => f.write_str("I(2)"),
            Self::Unclassified => f.write_str("unclassified"),
        }
    }
}

/// Log-log slope of the variogram γ(h) = mean |y(t+h) − y(t)|² over lags
/// log-spaced in [4, len/16]. Roughly 0 for I(0), 1 for I(1), 3 for I(2).
pub fn variogram_slope(y: &[Complex64]) -> f64 {
    let h_max = (y.len() / 16).max(5);
    let lags = log_spaced_lags(4, h_max, 10);
    let (xs, ys): (Vec<f64>, Vec<f64>) = lags
        .iter()
        .map(|&h| {
            let m = y.len() - h;
            let g = (0..m).map(|t| (y[t + h] - y[t]).norm_sqr()).sum::<f64>() / m as f64;
            ((h as f64).ln(), g.max(f64::MIN_POSITIVE).ln())
        })
        .unzip();
    ols_slope(&xs, &ys)
}

fn log_spaced_lags(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut lags: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    lags.dedup();
    lags
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope-band classification; steep paths are differenced once and must
/// then look I(1) to be called I(2).
pub fn classify_path(y: &[Complex64]) -> (IntegrationOrder, f64) {
    let s = variogram_slope(y);
    let order = if s < 0.3 {
        IntegrationOrder::I0
    } else if s > 0.6 && s < 1.4 {
        IntegrationOrder::I1
    } else if s >= 1.4 {
        let diff: Vec<Complex64> = y.windows(2).map(|w| w[1] - w[0]).collect();
        let s2 = variogram_slope(&diff);
        if s2 > 0.6 && s2 < 1.4 {
            IntegrationOrder::I2
        } else {
            IntegrationOrder::Unclassified
        }
    } else {
        IntegrationOrder::Unclassified
    };
    (order, s)
}

/// Theoretical order of ⟨x, f⟩: the largest k with f*T₋ₖ ≠ 0.
pub fn expected_order(basic: &BasicSolution, pencil: &LinearPencil, f: &ComplexVector, depth: usize, tol: f64) -> usize {
    let coefs = singular_coefficients(basic, pencil, depth);
    let fh = ComplexMatrix::from_columns(f.len(), &[f.clone()]).adjoint();
    (1..=depth)
        .rev()
        .find(|&k| (&fh * &coefs[k - 1]).max_abs() > tol * coefs[k - 1].max_abs().max(1.0) * f.norm())
        .unwrap_or(0)
}

/// One unit functional per order 0..=depth: f annihilates T₋ₖ₋₁ … T₋_depth
/// but not T₋ₖ.
pub fn auto_functionals(basic: &BasicSolution, pencil: &LinearPencil, depth: usize) -> Vec<(ComplexVector, usize)> {
    let n = pencil.n;
    let coefs = singular_coefficients(basic, pencil, depth);
    let scale = coefs.iter().map(|c| c.max_abs()).fold(1.0, f64::max);
    let abs_tol = 1e-8 * scale;
    let mut out = Vec::new();
    for k in 0..=depth {
        let cols: Vec<ComplexVector> = coefs[k..].iter().flat_map(|c| (0..n).map(|j| c.column(j)).collect::<Vec<_>>()).collect();
        let left_null = if cols.is_empty() {
            ComplexMatrix::identity(n)
        } else {
            ComplexMatrix::from_columns(n, &cols).adjoint().kernel(abs_tol)
        };
        if left_null.cols() == 0 {
            continue;
        }
        let f = if k == 0 {
            left_null.column(0)
        } else {
            let hit = &left_null.adjoint() * &coefs[k - 1];
            if hit.max_abs() <= abs_tol {
                continue;
            }
            let u = hit.leading_left_singular(1).column(0);
            left_null.mul_vec(&u)
        };
        let f = f.unscale(f.norm());
        out.push((f, k));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalProbe {
    #[serde(with = "crate::linalg::vector_serde")]
    pub functional: ComplexVector,
    pub expected: IntegrationOrder,
    pub slopes: Vec<f64>,
    pub observed: Vec<IntegrationOrder>,
    /// Fraction of seeds classified as `expected`.
    pub hit_rate: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub t_end: i64,
    pub seeds: Vec<u64>,
    pub min_fraction: f64,
    pub functionals: Vec<FunctionalProbe>,
    pub pass: bool,
}

/// Simulates the model with unit Gaussian noise for each seed and classifies
/// y(t) = Σᵢ xᵢ(t)·conj(fᵢ) for every functional. A functional passes when
/// at least `min_fraction` of the seeds agree with its expected order.
pub fn cointegration_probe(
    model: &ArmaModel,
    functionals: &[(ComplexVector, IntegrationOrder)],
    t_end: i64,
    seeds: &[u64],
    min_fraction: f64,
) -> Result<ProbeReport> {
    if t_end < 256 {
        return Err(Error::InvalidInput(format!("probe horizon {t_end} too short for the variogram")));
    }
    for (f, _) in functionals {
        if f.len() != model.dim() {
            return Err(Error::ShapeMismatch(format!("functional of length {} for dimension {}", f.len(), model.dim())));
        }
    }
    let per_seed: Vec<Vec<(IntegrationOrder, f64)>> = seeds
        .par_iter()
        .map(|&seed| {
            let noise = simulate_noise(&NoiseSpec::gaussian(1.0, seed, 0), model.noise_dim(), t_end)?;
            let g = ma1_g(model, &noise)?;
            let x = simulate_recursion(model, &g, t_end)?;
            let path = &x.values[1..];
            Ok(functionals
                .iter()
                .map(|(f, _)| {
                    let y: Vec<Complex64> = path.iter().map(|v| f.dotc(v)).collect();
                    let (o, s) = classify_path(&y);
                    (o, s)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let probes: Vec<FunctionalProbe> = functionals
        .iter()
        .enumerate()
        .map(|(i, (f, expected))| {
            let observed: Vec<IntegrationOrder> = per_seed.iter().map(|r| r[i].0).collect();
            let slopes = per_seed.iter().map(|r| r[i].1).collect();
            let hits = observed.iter().filter(|&o| o == expected).count();
            let hit_rate = hits as f64 / observed.len().max(1) as f64;
            FunctionalProbe { functional: f.clone(), expected: *expected, slopes, observed, hit_rate, pass: hit_rate >= min_fraction }
        })
        .collect();
    let pass = probes.iter().all(|p| p.pass);
    Ok(ProbeReport { t_end, seeds: seeds.to_vec(), min_fraction, functionals: probes, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arma::model::cvec;
    use crate::contour::default_radius;
    use crate::corpus;
    use crate::laurent::basic_solution;
    use crate::linalg::unit_vector;
    use crate::tolerances::Tolerances;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn white(len: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, 1.0).unwrap();
        (0..len).map(|_| Complex64::new(d.sample(&mut rng), 0.0)).collect()
    }

    fn cumsum(y: &[Complex64]) -> Vec<Complex64> {
        y.iter()
            .scan(Complex64::new(0.0, 0.0), |s, v| {
                *s += v;
                Some(*s)
            })
            .collect()
    }

    #[test]
    fn synthetic_orders() {
        let w = white(4096, 11);
        assert_eq!(classify_path(&w).0, IntegrationOrder::I0);
        let rw = cumsum(&w);
        assert_eq!(classify_path(&rw).0, IntegrationOrder::I1);
        assert_eq!(classify_path(&cumsum(&rw)).0, IntegrationOrder::I2);
    }

    #[test]
    fn matrix_example_functionals() {
        let p = corpus::make_matrix_example(0.5).unwrap().pencil;
        let model = ArmaModel::with_scalar_ma(&p, 0.5).unwrap();
        let fs = vec![(cvec(&[0.0, 1.0]), IntegrationOrder::I0), (cvec(&[1.0, 0.0]), IntegrationOrder::I1)];
        let rep = cointegration_probe(&model, &fs, 4096, &[1, 2, 3, 4], 1.0).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn auto_functionals_match_expected_order() {
        let p = corpus::make_c0_example(0.25, 10).unwrap().pencil;
        let basic = basic_solution(&p, default_radius(&p), 64, &Tolerances::default()).unwrap();
        let fs = auto_functionals(&basic, &p, 2);
        assert_eq!(fs.iter().map(|f| f.1).collect::<Vec<_>>(), vec![0, 1, 2]);
        for (f, k) in &fs {
            assert_eq!(expected_order(&basic, &p, f, 2, 1e-8), *k);
        }
        assert_eq!(expected_order(&basic, &p, &unit_vector(10, 0), 2, 1e-8), 2);
        assert_eq!(expected_order(&basic, &p, &unit_vector(10, 1), 2, 1e-8), 1);
        assert_eq!(expected_order(&basic, &p, &unit_vector(10, 2), 2, 1e-8), 0);
    }

    #[test]
    fn short_horizon_rejected() {
        let p = corpus::make_matrix_example(0.5).unwrap().pencil;
        let model = ArmaModel::with_scalar_ma(&p, 0.5).unwrap();
        assert!(cointegration_probe(&model, &[], 100, &[1], 1.0).is_err());
    }
}
