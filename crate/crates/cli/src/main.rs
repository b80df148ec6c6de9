//! `orthomg`: benchmark harness for the orthonormalization multigrid solvers.
//!
//! Exit status: 0 when every solve converged, 2 for an invalid configuration,
//! 3 when a solve stopped without converging, 1 for any other failure.

mod commands;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Status;
use crate::config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "orthomg", version, about = "Run and compare orthonormalization multigrid solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One solve; writes history.csv, summary.json and optionally trace.csv.
    Solve(Paths),
    /// Every variant in `compare.variants` on the same system; writes compare.csv and runs.csv.
    Compare(Paths),
    /// Worker-count and grid-size sweep; writes scaling.csv and runs.csv.
    Scaling(Paths),
}

#[derive(clap::Args)]
struct Paths {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output.directory` from the config.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let (paths, command): (&Paths, fn(&RunConfig, &std::path::Path) -> anyhow::Result<Status>) = match &cli.command {
        Command::Solve(p) => (p, commands::solve),
        Command::Compare(p) => (p, commands::compare),
        Command::Scaling(p) => (p, commands::scaling),
    };
    let cfg = RunConfig::load(&paths.config)?;
    let dir = paths.output.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    command(&cfg, &dir)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Converged) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("error: solver did not converge");
            ExitCode::from(3)
        }
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
