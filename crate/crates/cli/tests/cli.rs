use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use pencil_core::arma::{ArmaModel, ModelSpec, NoiseSpec};
use pencil_core::augment::PolynomialPencil;
use pencil_core::corpus;
use pencil_core::ComplexMatrix;

fn pencil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pencil")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_json(dir: &TempDir, name: &str, value: &impl serde::Serialize) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gr_model(dir: &TempDir, eps: f64, sigma: f64, burn_in: usize) -> PathBuf {
    let p = corpus::make_matrix_example(eps).unwrap().pencil;
    let model = ArmaModel::with_scalar_ma(&p, 0.5).unwrap();
    write_json(dir, "model.json", &ModelSpec::from_model(&model, NoiseSpec::gaussian(sigma, 7, burn_in)))
}

#[test]
fn analyze_matrix_example_reports_simple_pole() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("gr.json");
    let out = pencil(&["corpus", "matrix", "--eps", "0.5", "--out", s(&input)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = dir.path().join("report.json");
    let out = pencil(&["analyze", "--pencil", s(&input), "--out", s(&report)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = read_json(&report);
    assert_eq!(v["classification"]["class"]["kind"], "pole");
    assert_eq!(v["classification"]["class"]["order"], 1);
    let p: ComplexMatrix = serde_json::from_value(v["projections"]["p"].clone()).unwrap();
    assert_eq!(p.rank(1e-8), 1);
    assert_eq!(v["pass"], true);
    assert!(v["coefficients"]["-1"].is_array());
}

#[test]
fn analyze_sequence_example_reports_double_pole() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("c0.json");
    assert_eq!(code(&pencil(&["corpus", "c0", "--out", s(&input)])), 0);
    let out = pencil(&["analyze", "--pencil", s(&input)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classification"]["class"]["order"], 2);
}

#[test]
fn analyze_csv_lists_coefficients() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("gr.json");
    assert_eq!(code(&pencil(&["corpus", "matrix", "--out", s(&input)])), 0);
    let out = pencil(&["analyze", "--pencil", s(&input), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["object", "index", "row", "col", "re", "im"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let t_minus1: Vec<_> = rows.iter().filter(|r| &r[0] == "T" && &r[1] == "-1").collect();
    assert_eq!(t_minus1.len(), 4);
    let entry = t_minus1.iter().find(|r| &r[2] == "0" && &r[3] == "1").unwrap();
    assert!((entry[4].parse::<f64>().unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.json");
    std::fs::write(&input, "{ \"n\": 2, \"c0\": [[").unwrap();
    let out = pencil(&["analyze", "--pencil", s(&input)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("cannot parse"));
    let out = pencil(&["analyze", "--pencil", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&out), 3);
}

#[test]
fn invalid_nodes_and_tolerances_are_rejected() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("gr.json");
    assert_eq!(code(&pencil(&["corpus", "matrix", "--out", s(&input)])), 0);
    assert_eq!(code(&pencil(&["analyze", "--pencil", s(&input), "--nodes", "48"])), 3);
    assert_eq!(code(&pencil(&["analyze", "--pencil", s(&input), "--nodes", "8"])), 3);
    assert_eq!(code(&pencil(&["analyze", "--pencil", s(&input), "--tol-fund", "-1"])), 3);
}

#[test]
fn represent_extended_form_meets_tolerance() {
    let dir = TempDir::new().unwrap();
    let model = gr_model(&dir, 0.5, 1.0, 60);
    let traj = dir.path().join("traj.csv");
    let summary = dir.path().join("summary.json");
    let out = pencil(&[
        "represent", "--model", s(&model), "--form", "extended_s", "--T", "200", "--format", "csv", "--out", s(&traj), "--report", s(&summary),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = read_json(&summary);
    assert_eq!(v["pass"], true);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-6);
    let mut rdr = csv::Reader::from_path(&traj).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["t", "component", "coordinate", "re", "im"]);
    let components: std::collections::BTreeSet<String> = rdr.records().map(|r| r.unwrap()[1].to_string()).collect();
    for c in ["stochastic_trend", "det_sin", "stationary", "det_reg", "k_term", "x_hat", "oracle"] {
        assert!(components.contains(c), "missing {c}");
    }
}

#[test]
fn represent_natural_form_diverges_for_small_eps() {
    let dir = TempDir::new().unwrap();
    let model = gr_model(&dir, 0.5, 1.0, 20);
    let out = pencil(&["represent", "--model", s(&model), "--form", "natural_s", "--T", "20"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("natural representation diverges"), "{}", stderr(&out));
}

#[test]
fn represent_zero_noise_gives_zero_components() {
    let dir = TempDir::new().unwrap();
    let model = gr_model(&dir, 2.0, 0.0, 30);
    let out = pencil(&["represent", "--model", s(&model), "--form", "natural_ns", "--T", "30", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let mut rows = 0;
    for r in rdr.records() {
        let r = r.unwrap();
        assert_eq!(r[3].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[4].parse::<f64>().unwrap(), 0.0);
        rows += 1;
    }
    assert!(rows > 0);
}

#[test]
fn represent_is_reproducible_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let model = gr_model(&dir, 2.0, 1.0, 0);
    let run = || pencil(&["represent", "--model", s(&model), "--form", "natural_s", "--T", "40", "--burn-in", "auto", "--seed", "11"]);
    let (a, b) = (run(), run());
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let other = pencil(&["represent", "--model", s(&model), "--form", "natural_s", "--T", "40", "--burn-in", "auto", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn simulate_writes_three_paths() {
    let dir = TempDir::new().unwrap();
    let model = gr_model(&dir, 0.5, 1.0, 5);
    let out = pencil(&["simulate", "--model", s(&model), "--T", "10"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["noise"]["t_start"], -6);
    assert_eq!(v["x"]["t_start"], -1);
    assert_eq!(v["x"]["values"].as_array().unwrap().len(), 12);
    assert_eq!(code(&pencil(&["simulate", "--model", s(&model), "--burn-in", "many"])), 3);
}

#[test]
fn demo_matrix_passes_and_is_deterministic() {
    let a = pencil(&["demo", "matrix", "--eps", "0.5"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = pencil(&["demo", "matrix", "--eps", "0.5"]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["pass"], true);
    for c in v["checks"].as_array().unwrap() {
        assert!(c.get("expected").is_some() && c.get("observed").is_some());
    }
    assert!(stderr(&a).lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn demo_volterra_reports_norm() {
    let out = pencil(&["demo", "volterra", "--n", "64", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let row = rdr.records().map(|r| r.unwrap()).find(|r| r[0].starts_with("operator norm")).unwrap();
    assert!(row[4].parse::<f64>().unwrap() <= 5e-2);
    assert_eq!(&row[6], "true");
}

#[test]
fn demo_unknown_name_is_usage_error() {
    assert_eq!(code(&pencil(&["demo", "spiral"])), 3);
    assert_eq!(code(&pencil(&["frobnicate"])), 3);
    assert_eq!(code(&pencil(&["--help"])), 0);
}

#[test]
fn demo_failure_exits_with_verification_code() {
    // an absurdly tight fundamental tolerance cannot be met
    let out = pencil(&["demo", "c0", "--tol-fund", "1e-30"]);
    assert!([2, 4].contains(&code(&out)), "exit {}: {}", code(&out), stderr(&out));
}

#[test]
fn augment_recovers_polynomial_coefficients() {
    let dir = TempDir::new().unwrap();
    let poly = PolynomialPencil::engineered_unit_root(2, 2, 3).unwrap();
    let input = write_json(&dir, "poly.json", &poly);
    let out = pencil(&["augment", "--pencil", s(&input), "--nodes", "128"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["disagreement"].as_f64().unwrap() < 1e-8);
    assert!(v["coefficients"]["-1"].is_array());
}
