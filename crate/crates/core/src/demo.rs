//! Verification batteries for the corpus examples. Every check keeps the
//! expected value, where it comes from, and the observed value side by side.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::contour::{default_radius, ContourOracle, DEFAULT_NODES};
use crate::corpus::{self, expected_coefficient, CorpusEntry, CorpusKind, Source};
use crate::error::Result;
use crate::jordan::{compare_with_projections, reg_basis, regular_chain, sin_basis};
use crate::laurent::{annulus_estimate, basic_solution_from_oracle, closed_form_resolvent, verify_fundamental, BasicSolution, LaurentExpansion};
use crate::linalg::{c64, max_principal_angle, unit_vector, ComplexMatrix};
use crate::singularity::classify_singularity;
use crate::spectral::{projections, separate, SpectralPair};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub source: Source,
    pub expected: Value,
    pub observed: Value,
    /// Discrepancy measure compared against `tol`, when the check is numeric.
    pub error: Option<f64>,
    pub tol: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, source: Source, expected: Value, observed: Value, error: f64, tol: f64) -> Self {
        Self { name: name.into(), source, expected, observed, error: Some(error), tol: Some(tol), pass: error <= tol }
    }

    /// Error-only check; `expected` and `observed` describe the compared objects.
    pub fn bound(name: impl Into<String>, source: Source, error: f64, tol: f64) -> Self {
        Self::within(name, source, json!(0.0), json!(error), error, tol)
    }

    pub fn equal<T: Serialize + PartialEq>(name: impl Into<String>, source: Source, expected: &T, observed: &T) -> Self {
        Self {
            name: name.into(),
            source,
            expected: serde_json::to_value(expected).unwrap_or(Value::Null),
            observed: serde_json::to_value(observed).unwrap_or(Value::Null),
            error: None,
            tol: None,
            pass: expected == observed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub example: CorpusKind,
    pub radius: f64,
    pub nodes: usize,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl DemoReport {
    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoOptions {
    pub tol: Tolerances,
    pub radius: Option<f64>,
    pub nodes: usize,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), radius: None, nodes: DEFAULT_NODES }
    }
}

struct Ctx<'a> {
    entry: &'a CorpusEntry,
    oracle: ContourOracle,
    basic: BasicSolution,
    proj: SpectralPair,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn source(&self, key: &str) -> Source {
        self.entry.expected.sources.get(key).copied().unwrap_or(Source::Derived)
    }

    fn coefficient_key(j: i64) -> &'static str {
        match j {
            -1 => "t_minus1",
            -2 => "t_minus2",
            0 => "t0",
            j if j > 0 => "t_ell",
            _ => "t_minus_k",
        }
    }
}

fn mat(m: &ComplexMatrix) -> Value {
    serde_json::to_value(m).unwrap_or(Value::Null)
}

fn rel_diff(got: &ComplexMatrix, want: &ComplexMatrix) -> f64 {
    got.max_abs_diff(want) / want.max_abs().max(1.0)
}

fn annulus_points(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.3) / count as f64;
            let r = radius * (0.6 + 0.8 * k as f64 / count as f64);
            c64(1.0, 0.0) + Complex64::from_polar(r, theta)
        })
        .collect()
}

fn common<'a>(entry: &'a CorpusEntry, opts: &DemoOptions, j_range: (i64, i64), coef_tol: f64, fund_range: (i64, i64)) -> Result<(Ctx<'a>, f64)> {
    let p = &entry.pencil;
    let tol = &opts.tol;
    let radius = opts.radius.unwrap_or_else(|| default_radius(p));
    let oracle = ContourOracle::new(p, radius, opts.nodes, tol)?;
    let basic = basic_solution_from_oracle(p, &oracle, tol)?;
    let proj = projections(&basic, p, tol.fund)?;
    let mut ctx = Ctx { entry, oracle, basic, proj, checks: Vec::new() };

    for j in j_range.0..=j_range.1 {
        if let Some(want) = expected_coefficient(&entry.kind, j) {
            let got = ctx.oracle.coefficient(j)?;
            let key = Ctx::coefficient_key(j);
            ctx.checks.push(Check::within(format!("T[{j}] (contour)"), ctx.source(key), mat(&want), mat(&got), rel_diff(&got, &want), coef_tol));
        }
    }
    for (name, want, got) in [
        ("P", entry.expected.p.as_ref(), &ctx.proj.p),
        ("Q", entry.expected.q.as_ref(), &ctx.proj.q),
    ] {
        if let Some(want) = want {
            let key = name.to_lowercase();
            ctx.checks.push(Check::within(name, ctx.source(&key), mat(want), mat(got), got.max_abs_diff(want), coef_tol));
        }
    }
    let class = classify_singularity(&ctx.basic, p, p.n + 1, tol.fund)?;
    if let Some(want) = &entry.expected.class {
        ctx.checks.push(Check::equal("singularity class", ctx.source("class"), want, &class.class));
    }
    let k_max = (-fund_range.0 + 1).max(1) as usize;
    let l_max = fund_range.1.max(0) as usize;
    let exp = LaurentExpansion::from_oracle(&ctx.oracle, k_max, l_max)?;
    let fund = verify_fundamental(p, &exp, fund_range.0, fund_range.1, coef_tol)?;
    ctx.checks.push(Check::bound(
        format!("fundamental residuals j in [{}, {}]", fund_range.0, fund_range.1),
        Source::Derived,
        fund.left.max(fund.right),
        coef_tol,
    ));
    let sep = separate(p, &ctx.proj, tol.fund);
    ctx.checks.push(Check::bound("block separation off-diagonal residual", Source::Derived, sep.off_block_residual, sep.tol));

    let mut worst: f64 = 0.0;
    for z in annulus_points(radius, 8) {
        let a = closed_form_resolvent(&ctx.basic, p, z, tol.cond_cap)?;
        let b = p.solve_at(z, tol.cond_cap)?;
        worst = worst.max(a.max_abs_diff(&b) / b.max_abs().max(1.0));
    }
    ctx.checks.push(Check::bound("closed-form resolvent vs direct solve (8 annulus points)", Source::Derived, worst, 1e-9));

    let sin = sin_basis(p, 30, 1e-9)?;
    let reg = reg_basis(p, 30, f64::INFINITY)?;
    let chains = compare_with_projections(p, &sin, &reg, &ctx.proj);
    ctx.checks.push(Check::bound("chain subspaces vs projection ranges (max principal angle)", Source::Derived, chains.max_angle(), 1e-6));
    Ok((ctx, radius))
}

fn finish(ctx: Ctx<'_>, radius: f64, nodes: usize, mut notes: Vec<String>) -> DemoReport {
    notes.extend(ctx.entry.notes.iter().cloned());
    let pass = ctx.checks.iter().all(|c| c.pass);
    DemoReport { example: ctx.entry.kind.clone(), radius, nodes, checks: ctx.checks, notes, pass }
}

fn r_hat(ctx: &Ctx<'_>) -> f64 {
    let exp = LaurentExpansion::from_basic(&ctx.basic, &ctx.entry.pencil, 0, 60);
    annulus_estimate(&exp, 0, 60).1
}

pub fn matrix_battery(eps: f64, opts: &DemoOptions) -> Result<DemoReport> {
    let entry = corpus::make_matrix_example(eps)?;
    let (mut ctx, radius) = common(&entry, opts, (-3, 4), 1e-10, (-3, 6))?;
    let r = r_hat(&ctx);
    ctx.checks.push(Check::within("regular radius (root test, 10%)", ctx.source("regular_radius"), json!(eps.abs()), json!(r), (r / eps.abs() - 1.0).abs(), 0.1));
    let want_sin = ComplexMatrix::from_columns(2, &[unit_vector(2, 0)]);
    let angle = max_principal_angle(&sin_basis(&entry.pencil, 30, 1e-9)?.vectors, &want_sin);
    ctx.checks.push(Check::within("singular chain span = span{e1}", Source::Derived, json!(0.0), json!(angle), angle, 1e-6));
    Ok(finish(ctx, radius, opts.nodes, vec![]))
}

pub fn c0_battery(lambda: f64, n: usize, opts: &DemoOptions) -> Result<DemoReport> {
    let entry = corpus::make_c0_example(lambda, n)?;
    let (mut ctx, radius) = common(&entry, opts, (-3, 4), 1e-10, (-3, 6))?;
    let t_m2 = ctx.oracle.coefficient(-2)?.block(0, 0, 2, 2);
    let want = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    ctx.checks.push(Check::within("T[-2] leading 2x2 block", Source::Published, mat(&want), mat(&t_m2), t_m2.max_abs_diff(&want), 1e-10));
    let r = r_hat(&ctx);
    let want_r = (1.0 - lambda) / lambda;
    ctx.checks.push(Check::within("regular radius (root test, 10%)", ctx.source("regular_radius"), json!(want_r), json!(r), (r / want_r - 1.0).abs(), 0.1));
    let axes = ComplexMatrix::from_columns(n, &[unit_vector(n, 0), unit_vector(n, 1)]);
    let angle = max_principal_angle(&sin_basis(&entry.pencil, 30, 1e-9)?.vectors, &axes);
    ctx.checks.push(Check::within("singular chain span = span{e1, e2}", Source::Published, json!(0.0), json!(angle), angle, 1e-6));
    let notes = vec!["the published convergence radius 1/(1-lambda) does not match the coefficient growth; the regular radius reported here is (1-lambda)/lambda".into()];
    Ok(finish(ctx, radius, opts.nodes, notes))
}

pub fn volterra_battery(n: usize, opts: &DemoOptions) -> Result<DemoReport> {
    let entry = corpus::make_volterra_example(n)?;
    let (mut ctx, radius) = common(&entry, opts, (-3, 3), 1e-10, (-3, 4))?;
    let v = corpus::volterra_matrix(n);
    let norm = v.norm2();
    let want = corpus::volterra_reference_norm();
    ctx.checks.push(Check::within("operator norm vs 2/pi", Source::Published, json!(want), json!(norm), (norm - want).abs(), 5e-2));
    let sv = v.singular_values();
    for k in 0..3 {
        let want = corpus::volterra_reference_gram_eigenvalue(k);
        let got = sv[k] * sv[k];
        ctx.checks.push(Check::within(format!("Gram eigenvalue {k} (relative, mesh 1/n)"), Source::Published, json!(want), json!(got), (got / want - 1.0).abs(), 10.0 / n as f64));
    }
    let mut t_ell: f64 = 0.0;
    for l in 0..=5 {
        t_ell = t_ell.max(ctx.oracle.coefficient(l)?.max_abs());
    }
    ctx.checks.push(Check::bound("regular coefficients T[0..5] vanish", Source::Published, t_ell, 1e-10));
    let roots: Vec<f64> = (2..=40).map(|k| v.pow(k).norm2().powf(1.0 / k as f64)).collect();
    let decreasing = roots.windows(2).all(|w| w[1] < w[0]);
    ctx.checks.push(Check::equal("||V^k||^(1/k) strictly decreasing, k = 2..40", Source::Published, &true, &decreasing));
    Ok(finish(ctx, radius, opts.nodes, vec![]))
}

pub fn hierarchy_battery(lambdas: &[f64], opts: &DemoOptions) -> Result<DemoReport> {
    let entry = corpus::make_hierarchy_example(lambdas)?;
    let (mut ctx, radius) = common(&entry, opts, (-3, 4), 1e-9, (-3, 6))?;
    let p = &entry.pencil;
    let sigma: f64 = lambdas.iter().sum();
    let v = corpus::hierarchy_eigenvector(lambdas)?;
    let eig = (p.c0.mul_vec(&v) - v.scale(sigma)).norm();
    ctx.checks.push(Check::bound("eigenrelation ||C0 v - sigma v||", Source::Published, eig, 1e-10));

    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let zeta = c64(1.0, 0.0) + Complex64::from_polar(sigma * (0.3 + 0.25 * k as f64), 0.4 + 1.3 * k as f64);
        let a = corpus::hierarchy_resolvent(lambdas, zeta)?;
        let b = p.solve_at(zeta, opts.tol.cond_cap)?;
        worst = worst.max(a.max_abs_diff(&b) / b.max_abs().max(1.0));
    }
    ctx.checks.push(Check::bound("resolvent block formula vs direct solve (5 points)", Source::Published, worst, 1e-9));

    let rank = ctx.proj.p_c.rank(1e-8);
    ctx.checks.push(Check::equal("rank of complementary projection", Source::Published, &1usize, &rank));
    let span = ComplexMatrix::from_columns(p.n, &[v.normalize()]);
    let angle = max_principal_angle(&ctx.proj.p_c.range(1e-8), &span);
    ctx.checks.push(Check::within("complementary range = span{v}", Source::Published, json!(0.0), json!(angle), angle, 1e-8));

    let rate = regular_chain(p, &v, 60, 1e-9)?.rate;
    ctx.checks.push(Check::within(
        "regular chain growth rate from v (relative)",
        Source::Derived,
        json!(1.0 / sigma),
        json!(rate),
        (rate * sigma - 1.0).abs(),
        0.05,
    ));
    let notes = vec![format!(
        "regular chains from v grow like (1/sigma)^n = {:.4}^n since C1^-1 C0 v = sigma v; the published rate is sigma = {sigma:.4}",
        1.0 / sigma
    )];
    Ok(finish(ctx, radius, opts.nodes, notes))
}

/// Runs the battery for a corpus example by name.
pub fn run(kind: &CorpusKind, opts: &DemoOptions) -> Result<DemoReport> {
    match kind {
        CorpusKind::Matrix { eps } => matrix_battery(*eps, opts),
        CorpusKind::C0 { lambda, n } => c0_battery(*lambda, *n, opts),
        CorpusKind::Volterra { n } => volterra_battery(*n, opts),
        CorpusKind::Hierarchy { lambdas } => hierarchy_battery(lambdas, opts),
    }
}
