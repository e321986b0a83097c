//! Reproducible command-line runs over `affsieve-core`, with JSON reports
//! and CSV tables.

pub mod commands;
pub mod config;
pub mod poly;
pub mod report;

use std::fs;
use std::path::Path;

use affsieve_core::Error as CoreError;
use serde_json::Value;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 validation, 3 budget, 4 search exhaustion, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(e) => match e {
                CoreError::BudgetExceeded { .. } | CoreError::OrbitSetNotRetained(_) => 3,
                CoreError::SearchExhausted(_) => 4,
                CoreError::Internal(_) => 1,
                _ => 2,
            },
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

/// Report plus optional CSV table for one configuration.
pub struct RunOutput {
    pub report: Value,
    pub csv: Option<commands::Table>,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let out = match cfg.command.as_str() {
        "count" => commands::count(cfg)?,
        "densities" => commands::densities(cfg)?,
        "sieve" => commands::sieve(cfg)?,
        "construct" => commands::construct(cfg)?,
        "bounds" => commands::bounds(cfg)?,
        "uniformity" => commands::uniformity(cfg)?,
        other => return Err(CliError::Validation(format!("unknown command {other}"))),
    };
    if out.csv.is_none() && cfg.raw("csv").is_some() {
        return Err(CliError::Validation(format!("{} has no CSV output", cfg.command)));
    }
    Ok(RunOutput { report: report::envelope(cfg, out.result), csv: out.csv })
}

/// Writes the report to `out` (stdout when absent) and the table to `csv`.
pub fn write_outputs(cfg: &RunConfig, output: &RunOutput) -> Result<(), CliError> {
    let text = report::render(&output.report);
    match cfg.raw("out") {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let (Some(path), Some(rows)) = (cfg.raw("csv"), &output.csv) {
        write_csv(Path::new(path), rows)?;
    }
    Ok(())
}

fn write_csv(path: &Path, rows: &commands::Table) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().flexible(false).from_path(path)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
