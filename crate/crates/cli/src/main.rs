//! `fhfm` command-line tool.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data or coverage error,
//! 4 numerical failure, 5 partial failure (some methods failed, the outputs
//! of the others were written).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "fhfm", version, about = "Hierarchical factor model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Generate a simulated panel and its ground truth.
    Simulate,
    /// Fit every configured method and report in-sample RMSE.
    Fit,
    /// Fit on the whole panel and forecast the largest configured horizon.
    Forecast,
    /// Simulation study over seeds, or rolling-window evaluation of a panel.
    Evaluate,
    /// Life expectancy and annuity values from forecast mortality surfaces.
    Actuarial,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fhfm::Error),
    #[error("{failed} of {total} methods failed")]
    Partial { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use fhfm::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Partial { .. } => 5,
            CliError::Core(e) if e.is_numerical() => 4,
            CliError::Core(
                E::Config(_)
                | E::Json(_)
                | E::InvalidSpec(_)
                | E::InvalidOrder { .. }
                | E::InvalidR { .. }
                | E::Rank { .. }
                | E::RankBudget { .. }
                | E::InvalidLagSet(_)
                | E::InvalidHorizon(_),
            ) => 2,
            CliError::Core(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(out) = cli.out {
        cfg.out = Some(out);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Fit => commands::fit(&cfg, &out),
        Command::Forecast => commands::forecast(&cfg, &out),
        Command::Evaluate => commands::evaluate(&cfg, &out),
        Command::Actuarial => commands::actuarial(&cfg, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
