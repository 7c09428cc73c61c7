use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slds_cli::{failure_report, out_dir, resolve, run, Experiment, Overrides, RunConfig};
use slds_core::fbm::FbmMethod;

#[derive(Parser)]
#[command(name = "slds", version, about = "Stochastic FitzHugh-Nagumo lattice experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an fBm path and check its covariance.
    Fbm(Common),
    /// Integrate one trajectory.
    Simulate(Common),
    /// Measure the contraction rate of a solution pair.
    Contraction(Common),
    /// Pullback convergence over nested horizons.
    Pullback(Common),
    /// Absorbing radius and fOU growth bounds.
    Radius(Common),
    /// Absorption, equilibrium, singleton, cocycle and dissipativity checks.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    varrho: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Total number of lattice sites 2N+1 (odd).
    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_parser = ["davies_harte", "hosking", "cholesky"])]
    method: Option<String>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            hurst: self.hurst,
            lambda: self.lambda,
            sigma: self.sigma,
            varrho: self.varrho,
            gamma: self.gamma,
            n_sites: self.n_sites,
            dt: self.dt,
            method: self.method.as_deref().map(|m| m.parse::<FbmMethod>().expect("validated by clap")),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match &cli.command {
        Command::Fbm(c) => (Experiment::Fbm, c),
        Command::Simulate(c) => (Experiment::Simulate, c),
        Command::Contraction(c) => (Experiment::Contraction, c),
        Command::Pullback(c) => (Experiment::Pullback, c),
        Command::Radius(c) => (Experiment::Radius, c),
        Command::Verify(c) => (Experiment::Verify, c),
    };
    let mut dir = common
        .out
        .clone()
        .unwrap_or_else(|| out_dir(&RunConfig { experiment, ..Default::default() }));
    let result = resolve(experiment, common.config.as_deref(), &common.overrides()).and_then(|cfg| {
        dir = out_dir(&cfg);
        run(&cfg)
    });
    match result {
        Ok(outcome) => {
            println!(
                "{} {}: {} ({})",
                experiment.name(),
                if outcome.pass { "PASS" } else { "FAIL" },
                outcome.out_dir.display(),
                outcome.files.join(", ")
            );
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(err) => {
            let report = failure_report(&err, Some(experiment));
            let text = serde_json::to_string_pretty(&report).unwrap_or_default();
            eprintln!("{text}");
            if std::fs::create_dir_all(&dir).is_ok() {
                let _ = std::fs::write(dir.join("failure.json"), format!("{text}\n"));
            }
            ExitCode::from(2)
        }
    }
}
