//! Command-line front end for `dqb-core`: reads a TOML run configuration,
//! runs one subcommand and writes its tables into the output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "dqb",
    version,
    about = "Memory-state simulations of the doubled-boson brain model"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files; created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for sweep points. Output does not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Squeeze parameters, occupations, entropy and overlaps along one code's trajectory.
    Evolve,
    /// Divergence of two nearby codes: series, Lyapunov fits, lifetimes, crossings.
    Chaos,
    /// Equal-time overlaps between every pair of selected codes.
    Overlap,
    /// Per-mode entanglement entropy and quasi-equilibrium β.
    Entropy,
    /// Times at which two codes overlap above a threshold.
    Associate,
    /// Closed forms against the truncated Fock-space oracle.
    OracleCheck,
    /// The doubled damped oscillator and its conserved quantity.
    Oscillator,
}

/// Run one command and return the paths written.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config", "a configuration file is required"))?;
    if cli.threads == 0 {
        return Err(CliError::config("--threads", "must be at least 1"));
    }
    let cfg = RunConfig::load(path)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::config("--threads", e.to_string()))?;
    let outcome = pool.install(|| match cli.command {
        Command::Evolve => commands::evolve(&cfg),
        Command::Chaos => commands::chaos(&cfg),
        Command::Overlap => commands::overlap_cmd(&cfg),
        Command::Entropy => commands::entropy(&cfg),
        Command::Associate => commands::associate(&cfg),
        Command::OracleCheck => commands::oracle_check(&cfg),
        Command::Oscillator => commands::oscillator(&cfg),
    })?;
    let mut written = Vec::new();
    for (name, contents) in &outcome.files {
        written.push(output::write_atomic(&cli.out, name, contents)?);
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(written),
    }
}
