//! `slq` — batch front-end for the stochastic-limit quantum toolkit.
//!
//! Every subcommand reads a scenario config (TOML sections per module,
//! strict keys), runs the computation, and writes deterministic CSV/JSON
//! artifacts: identical configs produce byte-identical outputs, serial or
//! parallel.
//!
//! Exit codes: 0 success, 2 validation failure (nothing written),
//! 3 numerical abort (partial outputs carry a `.partial` suffix).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod table;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl From<slq_core::Error> for CliError {
    fn from(e: slq_core::Error) -> Self {
        match e {
            slq_core::Error::EvolveAborted { .. } | slq_core::Error::ResistivitySingular => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "slq", version, about = "stochastic-limit quantum toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Scenario config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Table output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Damping coefficient Gamma over a resonance grid.
    Gamma(RunArgs),
    /// Single transport evaluation on the LLL block.
    QheTransport(RunArgs),
    /// Transport sweep over a field grid.
    QheSweep(RunArgs),
    /// Alli-Sewell generator: structure report and optional evolution.
    LaserAs(RunArgs),
    /// Hepp-Lieb kernels matched onto Alli-Sewell parameters.
    LaserMatch(RunArgs),
    /// Dicke-Haken-Lax generator and its Alli-Sewell equivalence.
    LaserDhl(RunArgs),
    /// Gap-equation root at one (g, beta).
    BcsGap(RunArgs),
    /// Phase diagram over a (g, beta) grid.
    BcsPhase(RunArgs),
    /// Semiclassical spin trajectory.
    BcsDynamics(RunArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, runner): (&RunArgs, fn(&config::Config, &RunArgs) -> Result<(), CliError>) =
        match &cli.command {
            Command::Gamma(a) => (a, commands::run_gamma),
            Command::QheTransport(a) => (a, commands::run_qhe_transport),
            Command::QheSweep(a) => (a, commands::run_qhe_sweep),
            Command::LaserAs(a) => (a, commands::run_laser_as),
            Command::LaserMatch(a) => (a, commands::run_laser_match),
            Command::LaserDhl(a) => (a, commands::run_laser_dhl),
            Command::BcsGap(a) => (a, commands::run_bcs_gap),
            Command::BcsPhase(a) => (a, commands::run_bcs_phase),
            Command::BcsDynamics(a) => (a, commands::run_bcs_dynamics),
        };
    let cfg = config::Config::load(&args.config)?;
    runner(&cfg, args)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical abort: {msg}");
            std::process::exit(3);
        }
    }
}
