//! CSV rows, run manifests and the single writer every output file goes through.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stark_core::{BracketRecord, ConvergenceReport, SeriesRate, StudyConfig};

use crate::Failure;

/// Version tag of the CSV column layout.
pub const CSV_SCHEMA: &str = "stark-rows/1";
pub const MANIFEST_SCHEMA: &str = "stark-manifest/1";

/// One CSV line, long format.
#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    study: String,
    h: f64,
    observed: Option<f64>,
    normalized: Option<f64>,
    predicted: Option<f64>,
    deviation: Option<f64>,
    rate: Option<f64>,
    verdict: &'a str,
}

/// A sweep step that failed in the solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFailure {
    pub h: f64,
    pub error: String,
}

/// Which operator produced a row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub series: String,
    pub h: f64,
    pub operator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// `pass`, `fail` or `error`.
    pub verdict: String,
    pub reason: String,
    pub fitted_rate: Option<f64>,
    pub rates: Vec<SeriesRate>,
    pub notes: Vec<String>,
}

/// Everything needed to reproduce and audit a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub csv_schema: String,
    pub tool: Tool,
    pub command: String,
    pub started: String,
    pub finished: String,
    pub config: StudyConfig,
    pub outcome: Outcome,
    pub rows: Vec<Provenance>,
    pub failures: Vec<StepFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brackets: Option<Vec<BracketRecord>>,
    pub outputs: Vec<OutputFile>,
}

pub fn tool() -> Tool {
    Tool {
        name: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// CSV text for a report plus failed steps. Study names are qualified by series.
pub fn csv_text(
    study: &str,
    report: Option<&ConvergenceReport>,
    failures: &[StepFailure],
) -> Result<Vec<u8>, Failure> {
    let io = |e: csv::Error| Failure {
        code: crate::status::SOLVER,
        message: format!("CSV encoding failed: {e}"),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(r) = report {
        for row in &r.rows {
            w.serialize(CsvRow {
                study: format!("{}:{}", r.study, row.series),
                h: row.h,
                observed: Some(row.observed),
                normalized: Some(row.normalized),
                predicted: Some(row.predicted),
                deviation: Some(row.deviation),
                rate: r.rate_of(&row.series),
                verdict: r.verdict.label(),
            })
            .map_err(io)?;
        }
    }
    for f in failures {
        w.serialize(CsvRow {
            study: study.to_string(),
            h: f.h,
            observed: None,
            normalized: None,
            predicted: None,
            deviation: None,
            rate: None,
            verdict: "error",
        })
        .map_err(io)?;
    }
    if report.is_none() && failures.is_empty() {
        w.write_record([
            "study",
            "h",
            "observed",
            "normalized",
            "predicted",
            "deviation",
            "rate",
            "verdict",
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure {
        code: crate::status::SOLVER,
        message: format!("CSV encoding failed: {e}"),
    })
}

/// Sole owner of the output directory.
pub struct OutputWriter {
    dir: PathBuf,
    written: Vec<OutputFile>,
}

impl OutputWriter {
    pub fn new(dir: PathBuf) -> Result<Self, Failure> {
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
        Ok(OutputWriter {
            dir,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Failure {
            code: crate::status::SOLVER,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
        self.written.push(OutputFile {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(path)
    }

    /// Files written so far, with checksums.
    pub fn outputs(&self) -> Vec<OutputFile> {
        self.written.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_csv_has_header() {
        let text = String::from_utf8(csv_text("x", None, &[]).unwrap()).unwrap();
        assert_eq!(
            text.trim(),
            "study,h,observed,normalized,predicted,deviation,rate,verdict"
        );
    }

    #[test]
    fn failed_steps_become_error_rows() {
        let f = [StepFailure {
            h: 0.01,
            error: "no convergence".into(),
        }];
        let text = String::from_utf8(csv_text("x", None, &f).unwrap()).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",error"));
    }
}
