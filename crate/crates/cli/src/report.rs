//! Result tables.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub parameters: String,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub closed_form: Option<f64>,
    pub z: Option<f64>,
    /// `None` for rows that carry no verdict.
    pub pass: Option<bool>,
    pub note: String,
}

impl Row {
    pub fn new(parameters: impl Into<String>, estimate: f64) -> Self {
        Self {
            experiment: String::new(),
            parameters: parameters.into(),
            estimate,
            stderr: None,
            closed_form: None,
            z: None,
            pass: None,
            note: String::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub protocol: String,
    pub config_hash: String,
    pub seed: u64,
    pub trials: u64,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
}

/// The configuration as embedded in reports: everything that affects
/// results, without the output location.
fn reported_config(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut cfg = cfg.clone();
    cfg.outputs.dir = None;
    cfg
}

/// SHA-256 of the effective configuration's canonical JSON form, ignoring
/// where output is written.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(&reported_config(cfg)).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Report {
    pub fn new(command: &str, cfg: &ExperimentConfig, mut rows: Vec<Row>) -> Self {
        for (k, row) in rows.iter_mut().enumerate() {
            row.experiment = format!("{command}-{:03}", k + 1);
        }
        Self {
            command: command.to_string(),
            protocol: cfg.protocol.name().to_string(),
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            trials: cfg.trials,
            config: reported_config(cfg),
            rows,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "experiment",
            "protocol",
            "config_hash",
            "seed",
            "trials",
            "parameters",
            "estimate",
            "stderr",
            "closed_form",
            "z",
            "pass",
            "note",
        ])?;
        for r in &self.rows {
            let pass = match r.pass {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "",
            };
            w.write_record([
                r.experiment.as_str(),
                self.protocol.as_str(),
                self.config_hash.as_str(),
                &self.seed.to_string(),
                &self.trials.to_string(),
                &r.parameters,
                &num(r.estimate),
                &opt(r.stderr),
                &opt(r.closed_form),
                &opt(r.z),
                pass,
                &r.note,
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn to_structured(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Structured => self.to_structured(),
        }
    }

    /// Writes `<command>.csv` or `<command>.json` into `dir` and returns its path.
    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let ext = match format {
            Format::Csv => "csv",
            Format::Structured => "json",
        };
        let path = dir.join(format!("{}.{ext}", self.command));
        std::fs::write(&path, self.render(format)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
