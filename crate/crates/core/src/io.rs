//! CSV and JSON export of trajectories, reports and corpus entries.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::arma::noise::Trajectory;
use crate::arma::represent::RepresentationReport;
use crate::corpus::CorpusEntry;
use crate::error::{Error, Result};
use crate::linalg::ComplexVector;

#[derive(Serialize)]
struct Row<'a> {
    t: i64,
    component: &'a str,
    coordinate: usize,
    re: f64,
    im: f64,
}

/// Long-format CSV writer with columns t, component, coordinate, re, im.
pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(w: W) -> Self {
        Self { inner: csv::Writer::from_writer(w) }
    }

    pub fn vector(&mut self, t: i64, component: &str, v: &ComplexVector) -> Result<()> {
        for (coordinate, z) in v.iter().enumerate() {
            self.inner
                .serialize(Row { t, component, coordinate, re: z.re, im: z.im })
                .map_err(|e| Error::InvalidInput(format!("csv write failed: {e}")))?;
        }
        Ok(())
    }

    pub fn trajectory(&mut self, component: &str, path: &Trajectory) -> Result<()> {
        for (i, v) in path.values.iter().enumerate() {
            self.vector(path.t_start + i as i64, component, v)?;
        }
        Ok(())
    }

    pub fn representation(&mut self, report: &RepresentationReport) -> Result<()> {
        for s in &report.steps {
            for (name, v) in [
                ("stochastic_trend", &s.stochastic_trend),
                ("det_sin", &s.det_sin),
                ("stationary", &s.stationary),
                ("det_reg", &s.det_reg),
                ("k_term", &s.k_term),
                ("x_hat", &s.x_hat),
                ("oracle", &s.oracle),
            ] {
                self.vector(s.t, name, v)?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush().map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))?;
        self.inner
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))
    }
}

pub fn trajectory_csv(component: &str, path: &Trajectory) -> Result<String> {
    let mut sink = CsvSink::new(Vec::new());
    sink.trajectory(component, path)?;
    Ok(String::from_utf8(sink.finish()?).expect("csv output is utf-8"))
}

pub fn representation_csv(report: &RepresentationReport) -> Result<String> {
    let mut sink = CsvSink::new(Vec::new());
    sink.representation(report)?;
    Ok(String::from_utf8(sink.finish()?).expect("csv output is utf-8"))
}

/// Pencil JSON (n, c0, c1) with an "expected" section whose entries carry
/// their provenance.
pub fn corpus_json(entry: &CorpusEntry) -> Value {
    let mut v = serde_json::to_value(&entry.pencil).expect("pencil serializes");
    let expected = serde_json::to_value(&entry.expected).expect("expected values serialize");
    let obj = v.as_object_mut().expect("pencil is an object");
    obj.insert("example".into(), serde_json::to_value(&entry.kind).expect("kind serializes"));
    obj.insert("expected".into(), expected);
    obj.insert("truncation".into(), json!(entry.truncation));
    obj.insert("notes".into(), json!(entry.notes));
    v
}
