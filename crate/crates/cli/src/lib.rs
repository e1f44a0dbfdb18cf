//! Command-line driver: configuration, command dispatch and report writers.

pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;

pub use commands::run_command;
pub use config::Config;
pub use output::{Manifest, OutputDir};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration ({} problem(s))", .0.len())]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] qthermo::Error),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Core(qthermo::Error::Config(_)) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            _ => "runtime",
        }
    }

    pub fn details(&self) -> Vec<String> {
        match self {
            CliError::Config(v) => v.clone(),
            other => vec![other.to_string()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    CheckHypotheses,
    SolveTriple,
    Gibbs,
    Correlations,
    Pressure,
    HyperbolicTimes,
    CylinderCount,
    Threshold,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckHypotheses => "check-hypotheses",
            Command::SolveTriple => "solve-triple",
            Command::Gibbs => "gibbs",
            Command::Correlations => "correlations",
            Command::Pressure => "pressure",
            Command::HyperbolicTimes => "hyperbolic-times",
            Command::CylinderCount => "cylinder-count",
            Command::Threshold => "threshold",
        }
    }
}

/// Result of a completed command.
#[derive(Debug)]
pub struct Execution {
    pub manifest: Manifest,
    /// Built-in checks that did not hold; non-empty means exit code 1.
    pub failures: Vec<String>,
}

/// Load the configuration, run `command` and write its manifest.
pub fn execute(command: Command, config_path: &Path, out: &Path, seed: Option<u64>) -> Result<Execution, CliError> {
    let started = chrono::Utc::now();
    let clock = Instant::now();
    let mut cfg = Config::load(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let mut dir = OutputDir::create(out)?;
    dir.text("config.resolved.toml", &cfg.to_toml_string())?;
    let failures = run_command(command, &cfg, &mut dir)?;
    let manifest = Manifest {
        command: command.name().into(),
        config: serde_json::to_value(&cfg).map_err(|e| CliError::Io(e.to_string()))?,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        started: started.to_rfc3339(),
        elapsed_s: clock.elapsed().as_secs_f64(),
        outputs: dir.written().to_vec(),
    };
    output::write_json(&out.join("manifest.json"), &manifest)?;
    Ok(Execution { manifest, failures })
}
