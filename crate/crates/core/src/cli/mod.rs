//! Configuration-driven front end: `scan`, `verify` and `kraus`.
//!
//! Each command reads a [`config`] file, runs, and writes `report.json`
//! (source of truth, schema 1) and `report.csv` into the output directory.

pub mod commands;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

pub use commands::{execute, Check, Command, ExitStatus, Outcome};
pub use config::{parse_config, parse_config_with_seed, ChannelSource, ExperimentConfig, KEYS};
pub use report::{payload_digest, JsonMatrix, ReportEnvelope, SCHEMA_VERSION};

use crate::error::{Error, Result};

/// Reads and resolves a config file, applying a seed override.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        location: path.display().to_string(),
        message: format!("cannot read config: {e}"),
    })?;
    let mut cfg = parse_config_with_seed(&text, seed)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Full command pipeline; returns the process exit status.
pub fn run(command: Command, config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> ExitStatus {
    let cfg = match load_config(config, seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::Config;
        }
    };
    let Some(dir) = out.or_else(|| cfg.output.clone()) else {
        eprintln!("error: no output directory (pass --out or set run.output)");
        return ExitStatus::Config;
    };
    let outcome = execute(command, &cfg);
    if let Err(e) = outcome.write(&dir) {
        eprintln!("error: writing reports to {}: {e}", dir.display());
        return ExitStatus::Failed;
    }
    match &outcome.envelope.error {
        Some(msg) => eprintln!("{}: {msg}", command.name()),
        None => eprintln!(
            "{}: {} ({})",
            command.name(),
            if outcome.envelope.passed { "all checks passed" } else { "verification failed" },
            dir.join("report.json").display()
        ),
    }
    outcome.status
}
