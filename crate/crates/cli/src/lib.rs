//! Library side of the `kdqlab` binary: argument parsing, scenario files and
//! report rendering. Exit codes are 0 when every check passes, 2 for usage
//! or input errors and 3 when a check fails.

pub mod commands;
pub mod file;
pub mod render;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::commands::{Outcome, WeakOptions};
use crate::file::ScenarioFile;
use crate::render::Format;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] kdqlab_core::Error),
}

#[derive(Debug, Parser)]
#[command(name = "kdqlab", version, about = "Kirkwood-Dirac quasi-probabilities of small quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a built-in scenario and its checks.
    Scenario {
        /// leggett-garg, three-box, cheshire-cat, hardy, peres-mermin or bell
        name: String,
        /// Angle parameter (leggett-garg, bell), in radians unless --deg.
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        /// Read --theta in degrees.
        #[arg(long)]
        deg: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Evaluate the KD table of a scenario file.
    Kd {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Simulate a weak pointer measurement on a scenario file.
    Weak {
        file: PathBuf,
        /// Comma-separated eigenvalues, one per intermediate basis vector.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        kappa: Option<Vec<f64>>,
        /// Pointer shift per unit eigenvalue.
        #[arg(long)]
        coupling: f64,
        /// Initial pointer standard deviation.
        #[arg(long)]
        width: f64,
        #[arg(long, default_value_t = 100_000)]
        shots: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also tabulate conditional means for s/g = 2, 4, ..., 64.
        #[arg(long)]
        sweep: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

fn load(path: &Path) -> Result<file::Loaded, CliError> {
    let name = path.file_stem().map_or_else(|| "file".into(), |s| s.to_string_lossy().into_owned());
    ScenarioFile::read(path)?.load(&name)
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Scenario { name, theta, deg, format } => {
            let theta = theta.map(|t| if deg { t.to_radians() } else { t });
            if theta.is_some_and(|t| !t.is_finite()) {
                return Err(CliError::Usage("--theta must be finite".into()));
            }
            commands::run_scenario(&name, theta, format)
        }
        Command::Kd { file, format } => commands::run_kd(&load(&file)?, format),
        Command::Weak { file, kappa, coupling, width, shots, seed, sweep, format } => {
            let opts = WeakOptions { kappa, coupling, width, shots, seed, sweep };
            commands::run_weak(&load(&file)?, &opts, format)
        }
    }
}

/// Maps an outcome to its exit code.
pub fn exit_code(result: &Result<Outcome, CliError>) -> u8 {
    match result {
        Ok(o) if o.passed => EXIT_OK,
        Ok(_) => EXIT_CHECK_FAILED,
        Err(_) => EXIT_USAGE,
    }
}
