//! `wedgewalk run --config <path> --out <dir> [--workers N]`
//!
//! Exit status: 0 success, 1 runtime failure, 2 invalid configuration,
//! 3 insufficient data for a fit, 4 a checked inequality or suite failed.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] wedgewalk::Error),

    #[error("{0}")]
    CheckFailed(String),

    #[error("output directory is locked by another run ({})", .0.display())]
    Locked(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        use wedgewalk::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Config(_) | E::Domain(_)) => 2,
            CliError::Core(E::ZeroSurvival { .. } | E::InsufficientData(_)) => 3,
            CliError::CheckFailed(_) => 4,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "wedgewalk", version, about = "Random walks in wedges: exit-time experiments and Lyapunov checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for path simulation (default: available cores).
        #[arg(long, env = "WEDGEWALK_WORKERS")]
        workers: Option<usize>,
    },
}

fn execute(config: PathBuf, out: PathBuf, workers: Option<usize>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))?;
    let base = config.parent().map(PathBuf::from).unwrap_or_default();
    let mut cfg = ExperimentConfig::parse(&text)?.resolve(&base)?;
    let workers = match workers {
        Some(0) => return Err(CliError::Config("workers: must be positive".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    run::run(&mut cfg, &out, workers)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, workers } => execute(config, out, workers),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
