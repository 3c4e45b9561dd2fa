//! Experiment configs, the experiment registry, and report/CSV output.

mod config;
mod experiments;
mod output;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

pub use config::{ExperimentConfig, Params};
pub use experiments::{find, Experiment, Preset, REGISTRY};
pub use output::{operator_hash, write_outcome, Check, ExperimentOutcome, Provenance, RateReport, Table, SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::numerics::Verdict;

fn lookup(id: &str) -> Result<&'static Experiment> {
    find(id).ok_or_else(|| {
        let known: Vec<&str> = REGISTRY.iter().map(|e| e.id).collect();
        Error::config("experiment_id", format!("unknown experiment '{id}' (known: {})", known.join(", ")))
    })
}

/// Runs one experiment. Errors carry the experiment id.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let exp = lookup(&cfg.experiment_id)?;
    let start = Instant::now();
    let mut resolved = experiments::Resolved::new(cfg);
    let body = (exp.run)(&mut resolved).map_err(|e| e.in_experiment(exp.id))?;
    let verdict = match body.base {
        Some(Verdict::Inconclusive) => Verdict::Inconclusive,
        base => RateReport::verdict_from_checks(&body.checks, base.unwrap_or(Verdict::Pass)),
    };
    let report = RateReport {
        schema_version: SCHEMA_VERSION,
        experiment_id: exp.id.to_string(),
        claim: exp.claim.to_string(),
        verdict,
        fitted: body.fitted,
        guarantee: body.guarantee,
        checks: body.checks,
        notes: body.notes,
        provenance: Provenance::new(body.operator, Value::Object(resolved.echo)),
    };
    Ok(ExperimentOutcome {
        report,
        tables: body.tables,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs one experiment and writes its files into `dir`.
pub fn run_and_write(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    let outcome = run_experiment(cfg)?;
    write_outcome(dir, &outcome).map_err(|e| e.in_experiment(&cfg.experiment_id))?;
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub experiment_id: String,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub preset: String,
    pub entries: Vec<SuiteEntry>,
}

impl SuiteSummary {
    /// Any FAIL or error.
    pub fn failed(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.error.is_some() || e.verdict == Some(Verdict::Fail))
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.entries.iter().filter(|e| e.verdict == Some(verdict)).count()
    }

    pub fn table(&self) -> String {
        let width = self.entries.iter().map(|e| e.experiment_id.len()).max().unwrap_or(0);
        let mut out = String::new();
        for e in &self.entries {
            let status = match (&e.verdict, &e.error) {
                (Some(v), _) => v.to_string(),
                (None, Some(err)) => format!("ERROR: {err}"),
                (None, None) => "?".to_string(),
            };
            out.push_str(&format!("{:<width$}  {status}  ({:.2} s)\n", e.experiment_id, e.elapsed_seconds));
        }
        out.push_str(&format!(
            "{}: {} PASS, {} FAIL, {} INCONCLUSIVE, {} errors\n",
            self.preset,
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Inconclusive),
            self.entries.iter().filter(|e| e.error.is_some()).count()
        ));
        out
    }
}

pub fn preset_members(preset: &str) -> Result<Vec<&'static Experiment>> {
    let wanted: &[Preset] = match preset {
        "paper" => &[Preset::Paper],
        "properties" => &[Preset::Properties],
        "all" => &[Preset::Paper, Preset::Properties],
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset '{other}' (expected paper, properties or all)"),
            ))
        }
    };
    Ok(REGISTRY.iter().filter(|e| wanted.contains(&e.preset)).collect())
}

/// Runs every experiment of a preset with default parameters, concurrently.
/// Each experiment writes into `<out>/<experiment-id>/`; errors are collected
/// rather than aborting the suite.
pub fn suite(preset: &str, out: Option<&Path>) -> Result<SuiteSummary> {
    let members = preset_members(preset)?;
    let entries = members
        .par_iter()
        .map(|exp| {
            let start = Instant::now();
            let cfg = ExperimentConfig::new(exp.id);
            let result = match out {
                Some(dir) => run_and_write(&cfg, &dir.join(exp.id)),
                None => run_experiment(&cfg),
            };
            let elapsed_seconds = start.elapsed().as_secs_f64();
            match result {
                Ok(o) => SuiteEntry {
                    experiment_id: exp.id.to_string(),
                    verdict: Some(o.report.verdict),
                    error: None,
                    elapsed_seconds,
                },
                Err(e) => SuiteEntry {
                    experiment_id: exp.id.to_string(),
                    verdict: None,
                    error: Some(e.to_string()),
                    elapsed_seconds,
                },
            }
        })
        .collect::<Vec<_>>();
    let summary = SuiteSummary {
        preset: preset.to_string(),
        entries,
    };
    if let Some(dir) = out {
        output::create_dir(dir)?;
        let path = dir.join("summary.json");
        std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n").map_err(|source| Error::Io { path, source })?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique_and_presets_sized() {
        let mut ids: Vec<&str> = REGISTRY.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), REGISTRY.len());
        assert_eq!(preset_members("paper").unwrap().len(), 8);
        assert_eq!(preset_members("properties").unwrap().len(), 7);
        assert_eq!(preset_members("all").unwrap().len(), 15);
        assert!(preset_members("everything").unwrap_err().is_config());
    }

    #[test]
    fn unknown_experiment_and_parameter_are_config_errors() {
        let e = run_experiment(&ExperimentConfig::new("no-such-experiment")).unwrap_err();
        assert!(e.is_config());
        let mut cfg = ExperimentConfig::new("paper-example-semigroup");
        cfg.set("betta", serde_json::json!(1.0));
        let e = run_experiment(&cfg).unwrap_err();
        assert!(e.is_config(), "{e}");
        assert!(e.to_string().contains("parameters.betta"), "{e}");
    }
}
