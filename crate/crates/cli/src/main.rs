// `!(x > y)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::RunConfig;

/// Simulate up-converted NOON-state interferometry and write CSV data with
/// `key = value` summaries.
#[derive(Debug, Parser)]
#[command(name = "noonsim", version, about)]
struct Cli {
    /// Configuration file (`[section]` / `key = value`); defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for Poisson counting.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report expected counts without Poisson sampling.
    #[arg(long, global = true)]
    noiseless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emission, acceptance and filtered spectra.
    Spectra,
    /// HOM dips of the source and of the up-converted photons.
    Hom,
    /// Coincidences behind a second splitter.
    Bunching,
    /// One- and two-photon phase fringes, visibility fits and SQL verdict.
    Fringe,
    /// Detection-efficiency budget.
    Budget,
}

fn run(cli: Cli) -> Result<String> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output = out;
    }
    cfg.noiseless |= cli.noiseless;
    match cli.command {
        Command::Spectra => commands::spectra_cmd(&cfg),
        Command::Hom => commands::hom_cmd(&cfg),
        Command::Bunching => commands::bunching_cmd(&cfg),
        Command::Fringe => commands::fringe_cmd(&cfg),
        Command::Budget => commands::budget_cmd(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
