//! `dispersive`: reproducible experiments on periodic dispersive equations.
//!
//! Exit status is 0 when the checked property holds, 1 when it fails or the
//! numerics break down, and 2 for usage errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dispersive_core::Error;

use crate::config::ConfigFile;
use crate::output::Output;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failure(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidField(_)
            | Error::TruncationMismatch { .. }
            | Error::InvalidSymbol(_)
            | Error::InvalidParameter { .. }
            | Error::UnknownFamily(_)
            | Error::UncertifiedPeriod { .. }
            | Error::CflViolation { .. }
            | Error::ExcludedPair { .. }
            | Error::DegenerateLadder(_)
            | Error::Parse(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dispersive", version, about = "Periodic dispersive equations: solver, normal form, small divisors and contraction experiments")]
struct Cli {
    /// Flat key = value file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory [default: $DISPERSIVE_OUT_DIR, else ./dispersive-out].
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Add a wall-clock timestamp to JSON reports.
    #[arg(long, global = true)]
    timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact phase identities and denominator bounds.
    Identities(commands::identities::Args),
    /// Excluded period set and certified period samples.
    Divisor(commands::divisor::Args),
    /// Integrate the equation and record conserved quantities.
    Simulate(commands::simulate::Args),
    /// Direct versus normal-form Duhamel term.
    Duhamel(commands::duhamel::Args),
    /// Smoothing-estimate amplitude ladder and B/R scalings.
    Smoothing(commands::smoothing::Args),
    /// Contraction of K(T) on certified periods.
    Contract(commands::contract::Args),
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failure(e.to_string()))?;
    }
    let file = cli.config.as_deref().map(ConfigFile::read).transpose()?;
    let file = file.as_ref();
    // Resolve the config before touching the output directory so usage errors
    // leave no files behind.
    match cli.command {
        Command::Identities(a) => {
            let cfg = config::resolve(file, &a)?;
            commands::identities::run(&cfg, &Output::resolve(cli.out_dir, cli.timestamp)?)
        }
        Command::Divisor(a) => {
            let cfg = config::resolve(file, &a)?;
            commands::divisor::run(&cfg, &Output::resolve(cli.out_dir, cli.timestamp)?)
        }
        Command::Simulate(a) => {
            let cfg = config::resolve(file, &a)?;
            commands::simulate::run(&cfg, &Output::resolve(cli.out_dir, cli.timestamp)?)
        }
        Command::Duhamel(a) => {
            let cfg = config::resolve(file, &a)?;
            commands::duhamel::run(&cfg, &Output::resolve(cli.out_dir, cli.timestamp)?)
        }
        Command::Smoothing(a) => {
            let cfg = config::resolve(file, &a)?;
            commands::smoothing::run(&cfg, &Output::resolve(cli.out_dir, cli.timestamp)?)
        }
        Command::Contract(a) => {
            let cfg = config::resolve(file, &a)?;
            commands::contract::run(&cfg, &Output::resolve(cli.out_dir, cli.timestamp)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("property check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                CliError::Failure(_) => 1,
            })
        }
    }
}
