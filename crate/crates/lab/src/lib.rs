//! Experiment runner for `ruelle-core`.
//!
//! One config file describes one experiment; [`run_experiment`] turns it into
//! a [`ResultRecord`] and [`report::emit_report`] writes it to disk.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use report::{emit_report, Format, ResultRecord};

use std::time::Instant;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("unknown experiment '{0}' (see `lab list`)")]
    UnknownExperiment(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("{context}: {source}")]
    Module {
        context: String,
        source: ruelle_core::Error,
    },
}

impl From<ruelle_core::Error> for LabError {
    fn from(source: ruelle_core::Error) -> Self {
        LabError::Module {
            context: "numerical core".into(),
            source,
        }
    }
}

impl LabError {
    /// Usage errors exit with 2, everything else with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::UnknownExperiment(_) | LabError::Config(_) => 2,
            LabError::Io(_) | LabError::Module { .. } => 1,
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultRecord, LabError> {
    let exp = experiments::find(&cfg.experiment).ok_or_else(|| LabError::UnknownExperiment(cfg.experiment.clone()))?;
    cfg.validate()?;
    let start = Instant::now();
    let outcome = (exp.run)(cfg).map_err(|e| match e {
        LabError::Module { source, .. } => LabError::Module {
            context: format!("experiment {}", exp.name),
            source,
        },
        other => other,
    })?;
    Ok(ResultRecord::new(cfg, outcome, start.elapsed()))
}
