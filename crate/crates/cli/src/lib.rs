//! Reproducible experiment runner for the NK landscape laboratory.
//!
//! A run takes one JSON [`ExperimentConfig`], evaluates the named experiment
//! over the Cartesian product of its ranges and writes a data file (CSV or
//! JSONL), a self-describing `record.json` and a `MANIFEST.json` with the
//! SHA-256 of every file. Data files depend only on the configuration, never
//! on the worker count.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

pub use config::{Experiment, ExperimentConfig, Format, Knobs, OutputConfig, Ranges};
pub use error::{CliError, CliResult};
pub use experiments::{execute, Outcome};
pub use output::{Cell, Check, ResultRecord, Table};

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub record: ResultRecord,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.record.passed
    }
}

/// Runs the experiment and persists its outputs under `config.output.dir`.
pub fn run(config: &ExperimentConfig) -> CliResult<RunSummary> {
    let outcome = execute(config)?;
    let name = config.experiment.name();
    let data_file = format!("{name}.{}", config.output.format.extension());
    let record = ResultRecord {
        experiment: name.to_string(),
        timestamp: output::timestamp(),
        build_id: output::build_id(),
        config: config.clone(),
        passed: outcome.passed(),
        checks: outcome.checks.clone(),
        data_file: data_file.clone(),
        columns: outcome.table.columns.clone(),
        rows: outcome.table.rows.len(),
    };
    let files = output::write_bundle(
        &config.output.dir,
        &[
            (
                data_file,
                outcome
                    .table
                    .render(config.output.format, name)
                    .into_bytes(),
            ),
            (
                "record.json".into(),
                (serde_json::to_string_pretty(&record)? + "\n").into_bytes(),
            ),
        ],
    )?;
    Ok(RunSummary { record, files })
}

/// Worker count from the `THREADS` environment variable, if set.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| {
                CliError::Usage(format!("THREADS must be a positive integer, got {v:?}"))
            }),
        Err(_) => Ok(None),
    }
}
