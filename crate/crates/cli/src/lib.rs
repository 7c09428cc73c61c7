//! Configuration loading, experiment orchestration and artifact output for
//! the `slds` binary.

pub mod config;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

pub use config::{load_config, parse_config, Experiment, Overrides, RunConfig};
pub use experiments::{run_experiment, Artifacts};

/// `git describe --always --dirty` at build time, or `unknown`.
pub const GIT_DESCRIBE: &str = env!("SLDS_GIT_DESCRIBE");

pub const DEFAULT_OUT: &str = "slds-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] slds_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(_) => "computation",
            CliError::Io { .. } => "io",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub git_describe: &'static str,
    pub experiment: &'static str,
    pub seed: u64,
    pub config: &'a RunConfig,
    pub files: Vec<&'a str>,
    pub pass: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub pass: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

pub fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out
        .clone()
        .unwrap_or_else(|| Path::new(DEFAULT_OUT).join(cfg.experiment.name()))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Validate, run the configured experiment and write its directory.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let artifacts = run_experiment(cfg)?;
    let dir = out_dir(cfg);
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    for (name, text) in &artifacts.files {
        write(&dir.join(name), text)?;
    }
    let manifest = Manifest {
        tool: "slds",
        version: env!("CARGO_PKG_VERSION"),
        git_describe: GIT_DESCRIBE,
        experiment: cfg.experiment.name(),
        seed: cfg.seed,
        config: cfg,
        files: artifacts.files.iter().map(|(n, _)| n.as_str()).collect(),
        pass: artifacts.pass,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(slds_core::Error::from)?;
    text.push('\n');
    write(&dir.join("manifest.json"), &text)?;
    Ok(RunOutcome {
        out_dir: dir,
        files: artifacts.files.into_iter().map(|(n, _)| n).collect(),
        pass: artifacts.pass,
    })
}

/// Machine-readable description of a run that could not complete.
pub fn failure_report(err: &CliError, experiment: Option<Experiment>) -> serde_json::Value {
    json!({
        "status": "error",
        "kind": err.kind(),
        "experiment": experiment.map(Experiment::name),
        "message": err.to_string(),
    })
}

/// Resolve the configuration: defaults, then the file, then the flags.
pub fn resolve(
    experiment: Experiment,
    config: Option<&Path>,
    overrides: &Overrides,
) -> Result<RunConfig, CliError> {
    let mut cfg = match config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.experiment = experiment;
    cfg.apply(overrides)?;
    cfg.validate()?;
    Ok(cfg)
}
