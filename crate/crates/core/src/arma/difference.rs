//! Powers of the backward difference ∇ = I − L applied to paths.

use crate::error::Result;
use crate::linalg::ComplexVector;

use super::noise::Trajectory;

/// binom(n, k) in floating point.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// ln binom(n, k), safe for arguments whose binomial overflows.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// ∇^{−k}g₊(t) = Σ_{s=0}^{t} binom(s+k−1, s) g(t−s), with g₊ zero before t = 0.
pub fn diff_neg(k: usize, g_plus: &Trajectory, t: i64) -> Result<ComplexVector> {
    let mut acc = ComplexVector::zeros(g_plus.dim());
    for s in 0..=t.max(-1) {
        let w = binomial((s as u64) + k as u64 - 1, s as u64);
        acc += g_plus.get(t - s)? * nalgebra::Complex::new(w, 0.0);
    }
    Ok(acc)
}

/// ∇^ℓ g(t) = Σ_{s=0}^{m} binom(ℓ, s)(−1)^s g(t−s), with m = ℓ for the full
/// history and m = min(ℓ, t) when truncated at zero.
pub fn diff_pos(l: usize, g: &Trajectory, t: i64, truncate_at_zero: bool) -> Result<ComplexVector> {
    let m = if truncate_at_zero { (l as i64).min(t) } else { l as i64 };
    let mut acc = ComplexVector::zeros(g.dim());
    for s in 0..=m {
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * binomial(l as u64, s as u64);
        acc += g.get(t - s)? * nalgebra::Complex::new(w, 0.0);
    }
    Ok(acc)
}

/// All of ∇^{−1}g₊, …, ∇^{−k}g₊ on [0, t_end] by repeated cumulative sums.
pub fn cumulative_sums(g_plus: &Trajectory, k: usize, t_end: i64) -> Result<Vec<Vec<ComplexVector>>> {
    let mut levels = Vec::with_capacity(k);
    let mut prev: Vec<ComplexVector> = (0..=t_end).map(|t| g_plus.get(t).cloned()).collect::<Result<_>>()?;
    for _ in 0..k {
        let mut acc = ComplexVector::zeros(g_plus.dim());
        let next: Vec<ComplexVector> = prev
            .iter()
            .map(|v| {
                acc += v;
                acc.clone()
            })
            .collect();
        levels.push(next.clone());
        prev = next;
    }
    Ok(levels)
}
