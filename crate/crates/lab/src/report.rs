//! Result records and their on-disk form.
//!
//! Output layout for a run of experiment `E` into directory `out`:
//!
//! - `out/E.json`: the summary (always written).
//! - `out/E.<series>.csv`: one file per series with `--format csv`; columns
//!   `n,value_re,value_im,stderr,tag`.
//!
//! Wall time is reported on stderr only, so reruns are byte-identical.

use crate::config::ExperimentConfig;
use crate::experiments::Outcome;
use crate::{LabError, VERSION};
use ruelle_core::ergodic::{SeriesRecord, Tag};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            bound,
            // NaN fails.
            pass: value <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            bound,
            pass: value >= bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub n: usize,
    pub value_re: f64,
    pub value_im: f64,
    pub stderr: f64,
    pub tag: Tag,
}

impl From<&SeriesRecord> for SeriesRow {
    fn from(r: &SeriesRecord) -> Self {
        Self {
            n: r.n,
            value_re: r.value.re,
            value_im: r.value.im,
            stderr: r.stderr,
            tag: r.tag,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub rows: Vec<SeriesRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub version: String,
    /// SHA-256 of the canonical config text and the version.
    pub inputs_hash: String,
    pub seed: u64,
    pub budget: usize,
    pub scalars: BTreeMap<String, f64>,
    pub series: Vec<Series>,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

pub fn inputs_hash(cfg: &ExperimentConfig) -> String {
    let mut h = Sha256::new();
    h.update(cfg.canonical().as_bytes());
    h.update(b"\0");
    h.update(VERSION.as_bytes());
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl ResultRecord {
    pub fn new(cfg: &ExperimentConfig, outcome: Outcome, wall_time: Duration) -> Self {
        let pass = outcome.assertions.iter().all(|a| a.pass);
        Self {
            experiment: cfg.experiment.clone(),
            version: VERSION.to_string(),
            inputs_hash: inputs_hash(cfg),
            seed: cfg.seed,
            budget: cfg.budget,
            scalars: outcome.scalars,
            series: outcome.series,
            assertions: outcome.assertions,
            pass,
            wall_time,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    /// CSV series files plus the JSON summary.
    #[default]
    Csv,
    /// JSON summary only (series embedded).
    Json,
}

pub fn series_csv(series: &Series) -> String {
    let mut out = String::from("n,value_re,value_im,stderr,tag\n");
    for r in &series.rows {
        let tag = match r.tag {
            Tag::Asserted => "asserted",
            Tag::Exploratory => "exploratory",
        };
        let _ = writeln!(out, "{},{:e},{:e},{:e},{}", r.n, r.value_re, r.value_im, r.stderr, tag);
    }
    out
}

/// Writes the report and returns the paths written, summary first.
pub fn emit_report(record: &ResultRecord, out: &Path, format: Format) -> Result<Vec<PathBuf>, LabError> {
    let io = |e: std::io::Error, p: &Path| LabError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(out).map_err(|e| io(e, out))?;
    let mut written = Vec::new();
    let summary = out.join(format!("{}.json", record.experiment));
    std::fs::write(&summary, record.to_json()).map_err(|e| io(e, &summary))?;
    written.push(summary);
    if format == Format::Csv {
        for s in &record.series {
            let path = out.join(format!("{}.{}.csv", record.experiment, s.name));
            std::fs::write(&path, series_csv(s)).map_err(|e| io(e, &path))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_header_only() {
        let s = Series {
            name: "x".into(),
            rows: Vec::new(),
        };
        assert_eq!(series_csv(&s), "n,value_re,value_im,stderr,tag\n");
    }

    #[test]
    fn nan_assertions_fail() {
        assert!(!Assertion::at_most("a", f64::NAN, 1.0).pass);
        assert!(!Assertion::at_least("a", f64::NAN, 1.0).pass);
        assert!(Assertion::at_least("a", 2.0, 1.0).pass);
    }
}
