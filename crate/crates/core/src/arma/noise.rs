use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexVector};

/// Time-indexed sequence of vectors on a contiguous range starting at `t_start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t_start: i64,
    #[serde(with = "vec_serde")]
    pub values: Vec<ComplexVector>,
}

pub(crate) mod vec_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[ComplexVector], s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = v.iter().map(|x| x.iter().map(|z| [z.re, z.im]).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ComplexVector>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        Ok(rows
            .into_iter()
            .map(|r| ComplexVector::from_iterator(r.len(), r.into_iter().map(|[a, b]| c64(a, b))))
            .collect())
    }
}

impl Trajectory {
    pub fn new(t_start: i64, values: Vec<ComplexVector>) -> Self {
        Self { t_start, values }
    }

    pub fn t_end(&self) -> i64 {
        self.t_start + self.values.len() as i64 - 1
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn covers(&self, t: i64) -> bool {
        t >= self.t_start && t <= self.t_end()
    }

    pub fn get(&self, t: i64) -> Result<&ComplexVector> {
        if !self.covers(t) {
            return Err(Error::IndexOutOfRange { t, start: self.t_start, end: self.t_end() });
        }
        Ok(&self.values[(t - self.t_start) as usize])
    }

    /// Value at `t`, or zero outside the stored range.
    pub fn get_or_zero(&self, t: i64) -> ComplexVector {
        self.get(t).cloned().unwrap_or_else(|_| ComplexVector::zeros(self.dim()))
    }

    /// Restriction to t ≥ 0 padded with nothing: the path g₊ used by the
    /// truncated difference operators.
    pub fn positive_part(&self) -> Trajectory {
        let start = self.t_start.max(0);
        let values = (start..=self.t_end()).map(|t| self.values[(t - self.t_start) as usize].clone()).collect();
        Trajectory { t_start: start, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    /// Independent real N(0, σ²) in every coordinate.
    Gaussian { sigma: f64 },
    /// ε·w with P[w = 0] = p and P[w = 1] = 1 − p, centered to ε(w − (1 − p))
    /// unless `raw` is set.
    BernoulliScaled {
        p: f64,
        eps: f64,
        #[serde(default)]
        raw: bool,
    },
    /// Explicit values; row i is n(t_start + i). Each row is `[[re, im], …]`.
    Custom { table: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub kind: NoiseKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub burn_in: usize,
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64, seed: u64, burn_in: usize) -> Self {
        Self { kind: NoiseKind::Gaussian { sigma }, seed, burn_in }
    }
}

/// Noise path n(t) on [−B − 1, t_end], reproducible from the seed.
pub fn simulate_noise(spec: &NoiseSpec, dim: usize, t_end: i64) -> Result<Trajectory> {
    let t_start = -(spec.burn_in as i64) - 1;
    if t_end < t_start {
        return Err(Error::InvalidInput(format!("t_end = {t_end} precedes the presample start {t_start}")));
    }
    let len = (t_end - t_start + 1) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = match &spec.kind {
        NoiseKind::Gaussian { sigma } => {
            if !(*sigma >= 0.0) || !sigma.is_finite() {
                return Err(Error::InvalidInput(format!("sigma must be finite and nonnegative, got {sigma}")));
            }
            if *sigma == 0.0 {
                vec![ComplexVector::zeros(dim); len]
            } else {
                let normal = Normal::new(0.0, *sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
                (0..len)
                    .map(|_| ComplexVector::from_iterator(dim, (0..dim).map(|_| c64(normal.sample(&mut rng), 0.0))))
                    .collect()
            }
        }
        NoiseKind::BernoulliScaled { p, eps, raw } => {
            if !(*p > 0.0 && *p < 1.0) {
                return Err(Error::InvalidInput(format!("p must lie in (0, 1), got {p}")));
            }
            let shift = if *raw { 0.0 } else { 1.0 - p };
            (0..len)
                .map(|_| {
                    ComplexVector::from_iterator(
                        dim,
                        (0..dim).map(|_| {
                            let w = if rng.random::<f64>() < *p { 0.0 } else { 1.0 };
                            c64(eps * (w - shift), 0.0)
                        }),
                    )
                })
                .collect()
        }
        NoiseKind::Custom { table } => {
            if table.len() < len {
                return Err(Error::InvalidInput(format!("custom noise table has {} rows, {len} needed", table.len())));
            }
            table
                .iter()
                .take(len)
                .map(|row| {
                    if row.len() != dim {
                        return Err(Error::ShapeMismatch(format!("noise row has length {}, expected {dim}", row.len())));
                    }
                    Ok(ComplexVector::from_iterator(dim, row.iter().map(|[a, b]| c64(*a, *b))))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(Trajectory { t_start, values })
}
