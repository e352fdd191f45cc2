use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use pencil_core::arma::model::{ma1_g, simulate_recursion};
use pencil_core::arma::represent::choose_burn_in;
use pencil_core::arma::{represent as reconstruct, simulate_noise, Form, ModelSpec, RepresentOptions, Trajectory};
use pencil_core::augment::{augment as linearize, polynomial_fundamental_residual, unpack_laurent, PolynomialPencil};
use pencil_core::contour::{default_radius, ContourOracle};
use pencil_core::corpus::{self, CorpusKind};
use pencil_core::demo::{self, DemoOptions};
use pencil_core::io::{corpus_json, representation_csv, CsvSink};
use pencil_core::jordan::{compare_with_projections, reg_basis, sin_basis, ChainCheck};
use pencil_core::laurent::{annulus_estimate, basic_solution_from_oracle, verify_fundamental, FundamentalReport, LaurentExpansion};
use pencil_core::singularity::{classify_singularity, ClassificationReport};
use pencil_core::spectral::{projections, separate, SeparationReport};
use pencil_core::{ComplexMatrix, Error, LinearPencil, SpectralPair};

use crate::RunConfig;

pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    fn verify(message: impl Into<String>) -> Self {
        Self { code: EXIT_VERIFY, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::ShapeMismatch(_) | Error::NotApplicable(_) | Error::SigmaNotLessThanOne { .. } => EXIT_INPUT,
            Error::FundamentalResidualTooLarge { .. } | Error::ProjectionNotIdempotent { .. } | Error::BlockInconsistent { .. } => EXIT_VERIFY,
            _ => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

pub enum BurnIn {
    FromModel,
    Auto,
    Fixed(usize),
}

pub struct RunSettings {
    pub t_end: i64,
    pub burn_in: BurnIn,
    pub seed: Option<u64>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("cannot parse {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_text<F>(header: &[&str], fill: F) -> Result<String, Failure>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>| -> csv::Result<()> {
        w.write_record(header)?;
        fill(w)
    };
    write(&mut w).map_err(|e| Failure::input(format!("csv write failed: {e}")))?;
    let bytes = w.into_inner().map_err(|e| Failure::input(format!("csv write failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn matrix_rows(w: &mut csv::Writer<Vec<u8>>, object: &str, index: i64, m: &ComplexMatrix) -> csv::Result<()> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            w.write_record([object.to_string(), index.to_string(), i.to_string(), j.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Annulus {
    s_hat: f64,
    r_hat: f64,
}

#[derive(Serialize)]
struct AnalyzeReport {
    n: usize,
    radius: f64,
    nodes: usize,
    classification: ClassificationReport,
    coefficients: BTreeMap<i64, ComplexMatrix>,
    projections: SpectralPair,
    projection_defect: f64,
    annulus: Annulus,
    fundamental: FundamentalReport,
    separation: SeparationReport,
    chains: Option<ChainCheck>,
    notes: Vec<String>,
    pass: bool,
}

pub fn analyze(path: &Path, k_max: Option<usize>, l_max: usize, cfg: &RunConfig) -> Result<(), Failure> {
    let pencil: LinearPencil = read_json(path)?;
    let tol = &cfg.tol;
    let radius = cfg.radius.unwrap_or_else(|| default_radius(&pencil));
    let oracle = ContourOracle::new(&pencil, radius, cfg.nodes, tol)?;
    let basic = basic_solution_from_oracle(&pencil, &oracle, tol)?;
    let classification = classify_singularity(&basic, &pencil, pencil.n + 1, tol.fund)?;
    let k_max = k_max.unwrap_or(classification.class.singular_depth() + 1);
    let expansion = LaurentExpansion::from_oracle(&oracle, k_max, l_max)?;
    let proj = projections(&basic, &pencil, tol.fund)?;
    let scale = pencil.scale().max(1.0) * expansion.coefficients.values().map(|m| m.max_abs()).fold(1.0, f64::max);
    let fundamental = verify_fundamental(&pencil, &expansion, 1 - k_max as i64, l_max as i64, tol.fund * scale)?;
    let separation = separate(&pencil, &proj, tol.fund);
    let probe = LaurentExpansion::from_basic(&basic, &pencil, 2 * pencil.n + 2, 60);
    let (s_hat, r_hat) = annulus_estimate(&probe, 2 * pencil.n + 2, 60);
    let mut notes = Vec::new();
    let chains = match (sin_basis(&pencil, 30, 1e-9), reg_basis(&pencil, 30, f64::INFINITY)) {
        (Ok(sin), Ok(reg)) => Some(compare_with_projections(&pencil, &sin, &reg, &proj)),
        (Err(e), _) | (_, Err(e)) => {
            notes.push(format!("chain subspaces skipped: {e}"));
            None
        }
    };
    let report = AnalyzeReport {
        n: pencil.n,
        radius,
        nodes: cfg.nodes,
        classification,
        projection_defect: proj.defect(),
        projections: proj,
        annulus: Annulus { s_hat, r_hat },
        pass: fundamental.pass && separation.pass,
        fundamental,
        separation,
        chains,
        notes,
        coefficients: expansion.coefficients,
    };
    let body = if cfg.csv {
        csv_text(&["object", "index", "row", "col", "re", "im"], |w| {
            for (j, m) in &report.coefficients {
                matrix_rows(w, "T", *j, m)?;
            }
            for (name, m) in [("P", &report.projections.p), ("P_c", &report.projections.p_c), ("Q", &report.projections.q), ("Q_c", &report.projections.q_c)] {
                matrix_rows(w, name, 0, m)?;
            }
            Ok(())
        })?
    } else {
        to_json(&report)
    };
    emit(cfg.out.as_deref(), &body)?;
    if !report.fundamental.pass {
        return Err(Failure::verify(format!(
            "fundamental residuals {:.3e}/{:.3e} exceed {:.3e}",
            report.fundamental.left, report.fundamental.right, report.fundamental.tol
        )));
    }
    if !report.separation.pass {
        return Err(Failure::verify(format!("block separation residual {:.3e} exceeds tolerance", report.separation.off_block_residual)));
    }
    Ok(())
}

struct Prepared {
    spec: ModelSpec,
    model: pencil_core::arma::ArmaModel,
}

fn prepare(path: &Path, run: &RunSettings) -> Result<Prepared, Failure> {
    let mut spec: ModelSpec = read_json(path)?;
    if let Some(seed) = run.seed {
        spec.noise.seed = seed;
    }
    if let BurnIn::Fixed(b) = run.burn_in {
        spec.noise.burn_in = b;
    }
    let model = spec.model()?;
    Ok(Prepared { spec, model })
}

#[derive(Serialize)]
struct RepresentSummary {
    form: Form,
    class: pencil_core::SingularityClass,
    r_hat: f64,
    radius: f64,
    burn_in: usize,
    series_terms: Option<usize>,
    horizon: i64,
    seed: u64,
    max_residual: f64,
    mean_residual: f64,
    tol_rep: f64,
    pass: bool,
}

pub fn represent(path: &Path, form: Form, run: &RunSettings, summary_out: Option<&Path>, cfg: &RunConfig) -> Result<(), Failure> {
    let Prepared { mut spec, model } = prepare(path, run)?;
    let pencil = model.pencil();
    let radius = cfg.radius.unwrap_or_else(|| default_radius(&pencil));
    let oracle = ContourOracle::new(&pencil, radius, cfg.nodes, &cfg.tol)?;
    let basic = basic_solution_from_oracle(&pencil, &oracle, &cfg.tol)?;
    if let BurnIn::Auto = run.burn_in {
        spec.noise.burn_in = choose_burn_in(form, &model, &basic, cfg.tol.tail, 20_000)?;
    }
    let noise = simulate_noise(&spec.noise, model.noise_dim(), run.t_end)?;
    let opts = RepresentOptions { tol: cfg.tol, ..RepresentOptions::default() };
    let report = reconstruct(form, &model, &basic, &noise, run.t_end, &opts)?;
    let summary = RepresentSummary {
        form,
        class: report.class,
        r_hat: report.r_hat,
        radius,
        burn_in: report.budgets.burn_in,
        series_terms: report.budgets.series_terms,
        horizon: run.t_end,
        seed: spec.noise.seed,
        max_residual: report.max_residual,
        mean_residual: report.mean_residual,
        tol_rep: cfg.tol.rep,
        pass: report.max_residual <= cfg.tol.rep,
    };
    let body = if cfg.csv { representation_csv(&report)? } else { to_json(&report) };
    emit(cfg.out.as_deref(), &body)?;
    match summary_out {
        Some(p) => emit(Some(p), &to_json(&summary))?,
        None => eprintln!("{form}: max residual {:.3e}, mean {:.3e} (tol {:.1e})", summary.max_residual, summary.mean_residual, summary.tol_rep),
    }
    if !summary.pass {
        return Err(Failure::verify(format!("max residual {:.3e} exceeds tol-rep {:.3e}", summary.max_residual, cfg.tol.rep)));
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulationOutput {
    noise: Trajectory,
    g: Trajectory,
    x: Trajectory,
}

pub fn simulate(path: &Path, run: &RunSettings, cfg: &RunConfig) -> Result<(), Failure> {
    let Prepared { mut spec, model } = prepare(path, run)?;
    if let BurnIn::Auto = run.burn_in {
        let pencil = model.pencil();
        let radius = cfg.radius.unwrap_or_else(|| default_radius(&pencil));
        let oracle = ContourOracle::new(&pencil, radius, cfg.nodes, &cfg.tol)?;
        let basic = basic_solution_from_oracle(&pencil, &oracle, &cfg.tol)?;
        spec.noise.burn_in = choose_burn_in(Form::ExtendedS, &model, &basic, cfg.tol.tail, 20_000)?;
    }
    let noise = simulate_noise(&spec.noise, model.noise_dim(), run.t_end)?;
    let g = ma1_g(&model, &noise)?;
    let x = simulate_recursion(&model, &g, run.t_end)?;
    let body = if cfg.csv {
        let mut sink = CsvSink::new(Vec::new());
        sink.trajectory("noise", &noise)?;
        sink.trajectory("g", &g)?;
        sink.trajectory("x", &x)?;
        String::from_utf8(sink.finish()?).expect("csv output is utf-8")
    } else {
        to_json(&SimulationOutput { noise, g, x })
    };
    emit(cfg.out.as_deref(), &body)
}

pub fn demo(kind: &CorpusKind, cfg: &RunConfig) -> Result<(), Failure> {
    let opts = DemoOptions { tol: cfg.tol, radius: cfg.radius, nodes: cfg.nodes };
    let report = demo::run(kind, &opts)?;
    for c in &report.checks {
        eprintln!(
            "{} {} [{}] expected {} observed {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            serde_json::to_string(&c.source).expect("source serializes").trim_matches('"'),
            compact(&c.expected),
            compact(&c.observed),
        );
    }
    let body = if cfg.csv {
        csv_text(&["check", "source", "expected", "observed", "error", "tol", "pass"], |w| {
            for c in &report.checks {
                w.write_record([
                    c.name.clone(),
                    serde_json::to_string(&c.source).expect("source serializes").trim_matches('"').to_string(),
                    c.expected.to_string(),
                    c.observed.to_string(),
                    c.error.map(|e| e.to_string()).unwrap_or_default(),
                    c.tol.map(|e| e.to_string()).unwrap_or_default(),
                    c.pass.to_string(),
                ])?;
            }
            Ok(())
        })?
    } else {
        to_json(&report)
    };
    emit(cfg.out.as_deref(), &body)?;
    let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(Failure::verify(format!("{} check(s) failed: {}", failed.len(), failed.join("; "))));
    }
    Ok(())
}

fn compact(v: &serde_json::Value) -> String {
    let s = v.to_string();
    if s.len() > 60 {
        format!("{}...", &s[..s.char_indices().take_while(|(i, _)| *i < 57).last().map_or(0, |(i, c)| i + c.len_utf8())])
    } else {
        s
    }
}

pub fn corpus(kind: &CorpusKind, out: Option<&Path>) -> Result<(), Failure> {
    let entry = match kind {
        CorpusKind::Matrix { eps } => corpus::make_matrix_example(*eps)?,
        CorpusKind::C0 { lambda, n } => corpus::make_c0_example(*lambda, *n)?,
        CorpusKind::Volterra { n } => corpus::make_volterra_example(*n)?,
        CorpusKind::Hierarchy { lambdas } => corpus::make_hierarchy_example(lambdas)?,
    };
    emit(out, &to_json(&corpus_json(&entry)))
}

#[derive(Serialize)]
struct AugmentReport {
    n: usize,
    degree: usize,
    augmented_radius: f64,
    polynomial_radius: f64,
    nodes: usize,
    coefficients: BTreeMap<i64, ComplexMatrix>,
    disagreement: f64,
    fundamental_residual: f64,
    tol: f64,
    pass: bool,
}

pub fn augment(path: &Path, depth: usize, cfg: &RunConfig) -> Result<(), Failure> {
    let poly: PolynomialPencil = read_json(path)?;
    let lin = linearize(&poly).as_linear();
    let radius = cfg.radius.unwrap_or_else(|| default_radius(&lin));
    let oracle = ContourOracle::new(&lin, radius, cfg.nodes, &cfg.tol)?;
    let exp = LaurentExpansion::from_oracle(&oracle, depth, depth)?;
    let tol = cfg.tol.fund;
    let un = unpack_laurent(&exp.coefficients, poly.n, poly.degree, tol)?;
    let residual = polynomial_fundamental_residual(&poly, &un.coefficients);
    let report = AugmentReport {
        n: poly.n,
        degree: poly.degree,
        augmented_radius: radius,
        polynomial_radius: radius.powf(1.0 / poly.degree as f64),
        nodes: cfg.nodes,
        disagreement: un.disagreement,
        fundamental_residual: residual,
        tol,
        pass: residual <= tol,
        coefficients: un.coefficients,
    };
    let body = if cfg.csv {
        csv_text(&["object", "index", "row", "col", "re", "im"], |w| {
            for (j, m) in &report.coefficients {
                matrix_rows(w, "T", *j, m)?;
            }
            Ok(())
        })?
    } else {
        to_json(&report)
    };
    emit(cfg.out.as_deref(), &body)?;
    if !report.pass {
        return Err(Failure::verify(format!("polynomial fundamental residual {residual:.3e} exceeds {tol:.3e}")));
    }
    Ok(())
}
