use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{DecayFit, Verdict};
use crate::perturbation::Guarantee;

pub const SCHEMA_VERSION: u32 = 1;

/// A single named comparison inside a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. `"<= 1e-8"`.
    pub condition: String,
    pub pass: bool,
    /// Observations are recorded but never change the verdict.
    pub gating: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, condition: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.to_string(),
            value,
            condition: condition.into(),
            pass,
            gating: true,
        }
    }

    pub fn observation(name: &str, value: f64, condition: impl Into<String>, pass: bool) -> Self {
        Check {
            gating: false,
            ..Check::new(name, value, condition, pass)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub operator_hash: String,
    pub operator: Value,
    pub parameters: Value,
    pub artifact_version: String,
}

impl Provenance {
    pub fn new(operator: Value, parameters: Value) -> Self {
        Provenance {
            operator_hash: operator_hash(&operator),
            operator,
            parameters,
            artifact_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        }
    }
}

/// SHA-256 of the operator's canonical (key-sorted, compact) JSON.
pub fn operator_hash(operator: &Value) -> String {
    let canonical = serde_json::to_string(operator).unwrap_or_default();
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub schema_version: u32,
    pub experiment_id: String,
    /// The statement under test, in words.
    pub claim: String,
    pub verdict: Verdict,
    pub fitted: Option<DecayFit>,
    pub guarantee: Option<Guarantee>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl RateReport {
    /// FAIL if any gating check fails; otherwise `base`.
    pub fn verdict_from_checks(checks: &[Check], base: Verdict) -> Verdict {
        if checks.iter().any(|c| c.gating && !c.pass) {
            Verdict::Fail
        } else {
            base
        }
    }
}

/// A CSV data series: header row plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io {
            path: format!("{}.csv", self.name).into(),
            source: std::io::Error::other(e),
        };
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io {
            path: format!("{}.csv", self.name).into(),
            source: std::io::Error::other(e.to_string()),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: RateReport,
    pub tables: Vec<Table>,
    pub elapsed_seconds: f64,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// `report.json`, one CSV per table, and `metadata.json` (timestamps kept out
/// of the report so it stays reproducible).
pub fn write_outcome(dir: &Path, outcome: &ExperimentOutcome) -> Result<()> {
    create_dir(dir)?;
    let report = serde_json::to_string_pretty(&outcome.report)?;
    write_file(&dir.join("report.json"), &(report + "\n"))?;
    for table in &outcome.tables {
        write_file(&dir.join(format!("{}.csv", table.name)), &table.to_csv()?)?;
    }
    let written = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let metadata = serde_json::json!({
        "written_unix_seconds": written,
        "elapsed_seconds": outcome.elapsed_seconds,
    });
    write_file(&dir.join("metadata.json"), &(serde_json::to_string_pretty(&metadata)? + "\n"))
}
