//! Reconstruction of ARMA(1,1) unit-root paths from the resolvent expansion.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{annulus_estimate, singular_coefficients, BasicSolution, LaurentExpansion};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::singularity::{classify_singularity, SingularityClass};
use crate::spectral::SpectralPair;
use crate::tolerances::Tolerances;

use super::coefficients::{check_burn_in, decay_length, k_coefficients, presample_len, q_series, u_series, v_series, InnerOperators};
use super::difference::{cumulative_sums, ln_binomial};
use super::model::{ma1_g, simulate_recursion, ArmaModel};
use super::noise::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    NaturalNs,
    NaturalS,
    ExtendedNs,
    ExtendedS,
}

impl Form {
    pub const ALL: [Form; 4] = [Form::NaturalNs, Form::NaturalS, Form::ExtendedNs, Form::ExtendedS];

    pub fn is_natural(self) -> bool {
        matches!(self, Form::NaturalNs | Form::NaturalS)
    }

    /// Whether the form uses the presample g(−1), …, g(−B).
    pub fn is_standard(self) -> bool {
        matches!(self, Form::NaturalS | Form::ExtendedS)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Form::NaturalNs => "natural_ns",
            Form::NaturalS => "natural_s",
            Form::ExtendedNs => "extended_ns",
            Form::ExtendedS => "extended_s",
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Form {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Form::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown form '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentOptions {
    pub tol: Tolerances,
    /// Window for the regular-radius root test.
    pub l_probe: usize,
    /// Hard cap on the stationary-series truncation L.
    pub l_cap: usize,
}

impl Default for RepresentOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), l_probe: 60, l_cap: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepComponents {
    pub t: i64,
    #[serde(with = "crate::linalg::vector_serde")]
    pub stochastic_trend: ComplexVector,
    #[serde(with = "crate::linalg::vector_serde")]
    pub det_sin: ComplexVector,
    #[serde(with = "crate::linalg::vector_serde")]
    pub stationary: ComplexVector,
    #[serde(with = "crate::linalg::vector_serde")]
    pub det_reg: ComplexVector,
    #[serde(with = "crate::linalg::vector_serde")]
    pub k_term: ComplexVector,
    #[serde(with = "crate::linalg::vector_serde")]
    pub x_hat: ComplexVector,
    #[serde(with = "crate::linalg::vector_serde")]
    pub oracle: ComplexVector,
    pub residual: f64,
}

impl StepComponents {
    pub fn singular_part(&self) -> ComplexVector {
        &self.stochastic_trend + &self.det_sin
    }

    pub fn regular_part(&self) -> ComplexVector {
        &(&self.stationary + &self.det_reg) + &self.k_term
    }
}

/// Truncation budgets used by a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    /// Number of singular coefficients in the stochastic trend.
    pub trend_terms: usize,
    /// Stationary-series truncation L (natural forms only).
    pub series_terms: Option<usize>,
    /// Bound on the first omitted term of the stationary series.
    pub series_tail: Option<f64>,
    /// Presample length B.
    pub burn_in: usize,
    /// Relative size of the last presample coefficient (standard forms only).
    pub presample_tail: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationReport {
    pub form: Form,
    pub class: SingularityClass,
    pub r_hat: f64,
    pub budgets: Budgets,
    pub steps: Vec<StepComponents>,
    pub max_residual: f64,
    pub mean_residual: f64,
}

/// Regular-radius estimate from T_ℓ over ℓ ∈ [l_probe/2, l_probe].
pub fn regular_radius(basic: &BasicSolution, pencil: &crate::pencil::LinearPencil, l_probe: usize) -> f64 {
    let exp = LaurentExpansion::from_basic(basic, pencil, 0, l_probe);
    annulus_estimate(&exp, 0, l_probe).1
}

/// T_ℓ stored as (ln scale, unit-max-entry matrix) so that binomially
/// weighted sums stay in range.
struct ScaledSeries {
    ln_scale: Vec<f64>,
    unit: Vec<ComplexMatrix>,
}

fn scaled_regular(basic: &BasicSolution, pencil: &crate::pencil::LinearPencil, count: usize) -> ScaledSeries {
    let step = -basic.regular_operator(pencil);
    let mut ln_scale = Vec::with_capacity(count);
    let mut unit = Vec::with_capacity(count);
    let mut cur = basic.t0.clone();
    let mut acc = 0.0;
    for _ in 0..count {
        let m = cur.max_abs();
        if m > 0.0 {
            cur = cur.scale_real(1.0 / m);
            acc += m.ln();
        } else {
            acc = f64::NEG_INFINITY;
        }
        ln_scale.push(acc);
        unit.push(cur.clone());
        cur = &step * &cur;
    }
    ScaledSeries { ln_scale, unit }
}

/// ln Σ_{s=0}^{m} binom(ℓ, s).
fn ln_partial_binomial_sum(l: usize, m: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let terms: Vec<f64> = (0..=m.min(l)).map(|s| ln_binomial(l as u64, s as u64)).collect();
    for &x in &terms {
        best = best.max(x);
    }
    best + terms.iter().map(|x| (x - best).exp()).sum::<f64>().ln()
}

/// Smallest L past the peak with ‖T_L‖·Σ_{s ≤ min(L, h)} binom(L, s) ≤ tol.
pub fn series_truncation(basic: &BasicSolution, pencil: &crate::pencil::LinearPencil, horizon: usize, tol: f64, l_cap: usize) -> Result<(usize, f64)> {
    let step = -basic.regular_operator(pencil);
    let mut cur = basic.t0.clone();
    let mut ln_norm = 0.0;
    let mut prev = f64::INFINITY;
    for l in 0..=l_cap {
        let m = cur.max_abs();
        if m == 0.0 {
            return Ok((l, 0.0));
        }
        ln_norm += m.ln();
        cur = cur.scale_real(1.0 / m);
        let bound = (ln_norm + ln_partial_binomial_sum(l, horizon)).exp();
        if l >= 1 && bound <= tol && bound <= prev {
            return Ok((l, bound));
        }
        prev = bound;
        cur = &step * &cur;
    }
    Err(Error::TailNotConverged { what: "stationary series", bound: prev, tol })
}

/// W_s = Σ_{ℓ=s}^{L} binom(ℓ, s)(−1)^{ℓ+s} T_ℓ for s = 0..=horizon.
fn natural_weights(series: &ScaledSeries, l_max: usize, horizon: usize) -> Vec<ComplexMatrix> {
    let n = series.unit[0].rows();
    (0..=horizon)
        .map(|s| {
            let mut acc = ComplexMatrix::zeros(n, n);
            for l in s..=l_max {
                let ln_w = ln_binomial(l as u64, s as u64) + series.ln_scale[l];
                if ln_w == f64::NEG_INFINITY {
                    continue;
                }
                let sign = if (l + s) % 2 == 0 { 1.0 } else { -1.0 };
                acc = acc + series.unit[l].scale_real(sign * ln_w.exp());
            }
            acc
        })
        .collect()
}

/// Presample length at which the presample coefficients of `form` have
/// decayed below `tol_tail` relative to the first one, capped at `cap`.
pub fn choose_burn_in(form: Form, model: &ArmaModel, basic: &BasicSolution, tol_tail: f64, cap: usize) -> Result<usize> {
    let pencil = model.pencil();
    let ops = InnerOperators::new(basic, &pencil)?;
    let coefs = presample_coefficients(form, model, basic, &ops, cap)?;
    decay_length(&coefs, tol_tail).ok_or(Error::TailNotConverged {
        what: "presample",
        bound: coefs.last().map_or(f64::INFINITY, |c| c.max_abs()) / coefs[0].max_abs().max(f64::MIN_POSITIVE),
        tol: tol_tail,
    })
}

fn presample_coefficients(form: Form, model: &ArmaModel, basic: &BasicSolution, ops: &InnerOperators, count: usize) -> Result<Vec<ComplexMatrix>> {
    Ok(match form {
        Form::NaturalS | Form::NaturalNs => k_coefficients(basic, ops, count.max(1)),
        Form::ExtendedS | Form::ExtendedNs => q_series(model, basic, ops, count.max(1) + 1).split_off(1),
    })
}

/// Reconstructs x(t), 0 ≤ t ≤ t_end, in the requested form from the noise path
/// n on [−B − 1, t_end], and compares it with the direct recursion.
pub fn represent(form: Form, model: &ArmaModel, basic: &BasicSolution, noise: &Trajectory, t_end: i64, opts: &RepresentOptions) -> Result<RepresentationReport> {
    let tol = &opts.tol;
    let pencil = model.pencil();
    let n = pencil.n;
    if t_end < 0 {
        return Err(Error::InvalidInput(format!("horizon must be nonnegative, got {t_end}")));
    }
    let g = ma1_g(model, noise)?;
    if g.t_end() < t_end {
        return Err(Error::IndexOutOfRange { t: t_end, start: g.t_start, end: g.t_end() });
    }
    let b = presample_len(&g);
    let horizon = t_end as usize;

    let class = classify_singularity(basic, &pencil, n + 1, tol.fund)?.class;
    let r_hat = regular_radius(basic, &pencil, opts.l_probe);
    if form.is_natural() && !(r_hat > 1.0) {
        return Err(Error::NaturalFormDiverges { r_hat });
    }
    let ops = InnerOperators::new(basic, &pencil)?;

    let presample_tail = if form.is_standard() && b > 0 {
        let coefs = presample_coefficients(form, model, basic, &ops, b)?;
        check_burn_in(&coefs, b, tol.tail, "presample")?;
        let first = coefs[0].max_abs();
        Some(if first > 0.0 { coefs[b - 1].max_abs() / first } else { 0.0 })
    } else {
        None
    };

    let k_depth = class.singular_depth();
    let t_sing = singular_coefficients(basic, &pencil, k_depth);
    let g_plus = g.positive_part();
    let levels = cumulative_sums(&g_plus, k_depth, t_end)?;

    let c1c = pencil.c1.mul_vec(&model.c);
    let us = u_series(basic, &ops, horizon + 1);
    let vs = v_series(basic, &ops, horizon + b + 1);
    let reach = if form.is_standard() { horizon + b } else { horizon };

    let (weights, series_terms, series_tail) = match form {
        Form::NaturalNs | Form::NaturalS => {
            let (l, tail) = series_truncation(basic, &pencil, reach, tol.tail, opts.l_cap)?;
            let series = scaled_regular(basic, &pencil, l + 1);
            (natural_weights(&series, l, reach), Some(l), Some(tail))
        }
        Form::ExtendedNs | Form::ExtendedS => (q_series(model, basic, &ops, reach + 1), None, None),
    };

    let k_nat = if form == Form::NaturalS && b > 0 {
        let coefs = k_coefficients(basic, &ops, b);
        let mut k = ComplexVector::zeros(n);
        for r in 1..=b {
            k += coefs[r - 1].mul_vec(g.get(-(r as i64))?);
        }
        Some(pencil.c1.mul_vec(&k))
    } else {
        None
    };

    let oracle = simulate_recursion(model, &g, t_end)?;
    let zero = ComplexVector::zeros(n);
    let mut steps = Vec::with_capacity(horizon + 1);
    for t in 0..=t_end {
        let ti = t as usize;

        let mut trend = zero.clone();
        for k in 1..=k_depth {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            trend += t_sing[k - 1].mul_vec(&levels[k - 1][ti]) * Complex64::new(sign, 0.0);
        }
        let det_sin = -us[ti].mul_vec(&c1c);

        let lag_max = if form.is_standard() { ti + b } else { ti };
        let mut stationary = zero.clone();
        for s in 0..=lag_max {
            stationary += weights[s].mul_vec(g.get(t - s as i64)?);
        }

        let det_reg = match form {
            Form::NaturalNs | Form::NaturalS => -vs[ti].mul_vec(&c1c),
            Form::ExtendedNs | Form::ExtendedS => -weights[ti].mul_vec(&c1c),
        };

        let k_term = match form {
            Form::NaturalS => k_nat.as_ref().map_or(zero.clone(), |k1| -vs[ti].mul_vec(k1)),
            Form::ExtendedS => {
                let mut k = zero.clone();
                for r in 1..=b {
                    k += weights[ti + r].mul_vec(g.get(-(r as i64))?);
                }
                -k
            }
            _ => zero.clone(),
        };

        let x_hat = &(&(&(&trend + &det_sin) + &stationary) + &det_reg) + &k_term;
        let target = oracle.get(t)?.clone();
        let residual = (&x_hat - &target).norm();
        steps.push(StepComponents {
            t,
            stochastic_trend: trend,
            det_sin,
            stationary,
            det_reg,
            k_term,
            x_hat,
            oracle: target,
            residual,
        });
    }
    let max_residual = steps.iter().map(|s| s.residual).fold(0.0, f64::max);
    let mean_residual = steps.iter().map(|s| s.residual).sum::<f64>() / steps.len() as f64;
    Ok(RepresentationReport {
        form,
        class,
        r_hat,
        budgets: Budgets { trend_terms: k_depth, series_terms, series_tail, burn_in: b, presample_tail },
        steps,
        max_residual,
        mean_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    /// max_t ‖Pᶜ x_sin(t)‖.
    pub singular_leak: f64,
    /// max_t ‖P x_reg(t)‖.
    pub regular_leak: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks that the singular components lie in range(P) and the rest in range(Pᶜ).
pub fn split_projection(report: &RepresentationReport, proj: &SpectralPair, tol: f64) -> SplitReport {
    let mut singular_leak: f64 = 0.0;
    let mut regular_leak: f64 = 0.0;
    for s in &report.steps {
        singular_leak = singular_leak.max(proj.p_c.mul_vec(&s.singular_part()).norm());
        regular_leak = regular_leak.max(proj.p.mul_vec(&s.regular_part()).norm());
    }
    SplitReport { singular_leak, regular_leak, tol, pass: singular_leak <= tol && regular_leak <= tol }
}

/// Closed forms for poles of order one and two:
/// d = 1: x(t) = T₋₁[C₁c − Σ_{s≤t} g(s)] + Σ_{s≤t} V_s g(t−s) − V_tC₁c;
/// d = 2: adds T₋₂∇^{−2}g₊(t) − (t+1)T₋₂C₁c to the d = 1 expression.
pub fn reduced_form(model: &ArmaModel, basic: &BasicSolution, g: &Trajectory, t_end: i64, d: usize) -> Result<Trajectory> {
    if !(d == 1 || d == 2) {
        return Err(Error::NotApplicable(format!("reduced forms exist for pole orders 1 and 2, not {d}")));
    }
    let pencil = model.pencil();
    let ops = InnerOperators::new(basic, &pencil)?;
    let g_plus = g.positive_part();
    let levels = cumulative_sums(&g_plus, d, t_end)?;
    let vs = v_series(basic, &ops, t_end.max(0) as usize + 1);
    let c1c = pencil.c1.mul_vec(&model.c);
    let t_m2 = if d == 2 { Some(&(-basic.singular_operator(&pencil)) * &basic.t_minus1) } else { None };
    let mut values = Vec::new();
    for t in 0..=t_end {
        let ti = t as usize;
        let mut x = basic.t_minus1.mul_vec(&(&c1c - &levels[0][ti]));
        for s in 0..=ti {
            x += vs[s].mul_vec(g.get(t - s as i64)?);
        }
        x -= vs[ti].mul_vec(&c1c);
        if let Some(t2) = &t_m2 {
            x += t2.mul_vec(&levels[1][ti]);
            x -= t2.mul_vec(&c1c) * Complex64::new((t + 1) as f64, 0.0);
        }
        values.push(x);
    }
    Ok(Trajectory::new(0, values))
}

/// Σ_s S_s g(t−s) with S_s = Σ_{k=1}^{K}(−1)^k binom(s+k−1, s)T₋ₖ, the
/// coefficient route to the stochastic trend.
pub fn trend_by_coefficients(basic: &BasicSolution, pencil: &crate::pencil::LinearPencil, g_plus: &Trajectory, t: i64, depth: usize) -> Result<ComplexVector> {
    let t_sing = singular_coefficients(basic, pencil, depth);
    let mut acc = ComplexVector::zeros(pencil.n);
    for s in 0..=t {
        let mut coef = ComplexMatrix::zeros(pencil.n, pencil.n);
        for k in 1..=depth {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let w = super::difference::binomial((s as u64) + k as u64 - 1, s as u64);
            coef = coef + t_sing[k - 1].scale_real(sign * w);
        }
        acc += coef.mul_vec(g_plus.get(t - s)?);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arma::model::cvec;
    use crate::arma::noise::{simulate_noise, NoiseSpec};
    use crate::contour::default_radius;
    use crate::corpus;
    use crate::laurent::basic_solution;
    use crate::pencil::LinearPencil;
    use crate::spectral::projections;

    fn setup(p: &LinearPencil) -> BasicSolution {
        basic_solution(p, default_radius(p), 64, &Tolerances::default()).unwrap()
    }

    fn run(p: &LinearPencil, form: Form, t_end: i64, burn_in: usize, c: &[f64]) -> RepresentationReport {
        let basic = setup(p);
        let model = ArmaModel::with_scalar_ma(p, 0.5).unwrap().with_initial(cvec(c)).unwrap();
        let noise = simulate_noise(&NoiseSpec::gaussian(1.0, 7, burn_in), p.n, t_end).unwrap();
        represent(form, &model, &basic, &noise, t_end, &RepresentOptions::default()).unwrap()
    }

    #[test]
    fn all_forms_reproduce_unit_root_path() {
        let p = corpus::make_matrix_example(2.0).unwrap().pencil;
        for form in Form::ALL {
            let rep = run(&p, form, 120, 60, &[0.3, -1.0]);
            assert!(rep.max_residual < 1e-8, "{form}: {}", rep.max_residual);
            assert_eq!(rep.budgets.trend_terms, 1);
        }
    }

    #[test]
    fn second_order_pole_forms() {
        let p = corpus::make_c0_example(0.25, 10).unwrap().pencil;
        let c: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin()).collect();
        let basic = setup(&p);
        let model = ArmaModel::with_scalar_ma(&p, 0.5).unwrap();
        let b = choose_burn_in(Form::NaturalS, &model, &basic, 1e-10, 200).unwrap();
        assert!((14..=20).contains(&b), "{b}");
        for form in Form::ALL {
            let rep = run(&p, form, 100, b, &c);
            assert!(rep.max_residual < 1e-8, "{form}: {}", rep.max_residual);
            assert_eq!(rep.class, SingularityClass::Pole { order: 2 });
        }
    }

    #[test]
    fn natural_form_needs_regular_radius_above_one() {
        let p = corpus::make_matrix_example(0.5).unwrap().pencil;
        let basic = setup(&p);
        let model = ArmaModel::with_scalar_ma(&p, 0.5).unwrap();
        let noise = simulate_noise(&NoiseSpec::gaussian(1.0, 1, 0), 2, 50).unwrap();
        let err = represent(Form::NaturalNs, &model, &basic, &noise, 50, &RepresentOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NaturalFormDiverges { r_hat } if r_hat < 1.0));
        let rep = represent(Form::ExtendedNs, &model, &basic, &noise, 50, &RepresentOptions::default()).unwrap();
        assert!(rep.max_residual < 1e-8);
    }

    #[test]
    fn short_burn_in_rejected() {
        let p = corpus::make_c0_example(0.25, 10).unwrap().pencil;
        let basic = setup(&p);
        let model = ArmaModel::with_scalar_ma(&p, 0.5).unwrap();
        let noise = simulate_noise(&NoiseSpec::gaussian(1.0, 1, 3), 10, 20).unwrap();
        let err = represent(Form::NaturalS, &model, &basic, &noise, 20, &RepresentOptions::default()).unwrap_err();
        assert!(matches!(err, Error::TailNotConverged { .. }));
    }

    #[test]
    fn components_sum_and_split() {
        let p = corpus::make_c0_example(0.25, 10).unwrap().pencil;
        let basic = setup(&p);
        let proj = projections(&basic, &p, 1e-10).unwrap();
        let rep = run(&p, Form::ExtendedS, 80, 20, &[1.0; 10]);
        for s in &rep.steps {
            let sum = &(&(&(&s.stochastic_trend + &s.det_sin) + &s.stationary) + &s.det_reg) + &s.k_term;
            assert_eq!(sum, s.x_hat);
        }
        assert!(split_projection(&rep, &proj, 1e-8).pass);
    }

    #[test]
    fn reduced_forms_agree_with_recursion() {
        for (p, d) in [
            (corpus::make_matrix_example(0.5).unwrap().pencil, 1),
            (corpus::make_c0_example(0.25, 10).unwrap().pencil, 2),
        ] {
            let basic = setup(&p);
            let c: Vec<f64> = (0..p.n).map(|i| 1.0 - 0.3 * i as f64).collect();
            let model = ArmaModel::with_scalar_ma(&p, 0.5).unwrap().with_initial(cvec(&c)).unwrap();
            let noise = simulate_noise(&NoiseSpec::gaussian(1.0, 3, 0), p.n, 60).unwrap();
            let g = ma1_g(&model, &noise).unwrap();
            let x = simulate_recursion(&model, &g, 60).unwrap();
            let y = reduced_form(&model, &basic, &g, 60, d).unwrap();
            for t in 0..=60 {
                assert!((y.get(t).unwrap() - x.get(t).unwrap()).norm() < 1e-8, "d={d} t={t}");
            }
        }
    }

    #[test]
    fn trend_routes_agree() {
        let p = corpus::make_c0_example(0.25, 6).unwrap().pencil;
        let basic = setup(&p);
        let g = simulate_noise(&NoiseSpec::gaussian(1.0, 5, 0), 6, 40).unwrap().positive_part();
        let levels = cumulative_sums(&g, 2, 40).unwrap();
        let t_sing = singular_coefficients(&basic, &p, 2);
        for t in [0, 7, 40] {
            let direct = &t_sing[1].mul_vec(&levels[1][t as usize]) - &t_sing[0].mul_vec(&levels[0][t as usize]);
            let via = trend_by_coefficients(&basic, &p, &g, t, 2).unwrap();
            assert!((direct - via).norm() < 1e-9);
        }
    }

    #[test]
    fn form_names_roundtrip() {
        for f in Form::ALL {
            assert_eq!(f.as_str().parse::<Form>().unwrap(), f);
            assert_eq!(serde_json::to_string(&f).unwrap(), format!("\"{f}\""));
        }
        assert!("natural".parse::<Form>().is_err());
    }
}
