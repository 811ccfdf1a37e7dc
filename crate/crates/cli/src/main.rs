//! `blindwave` command-line tool.

mod commands;
mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status for invalid inputs or configuration.
const EXIT_CONFIG: u8 = 2;
/// Exit status for failures during estimation.
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "blindwave", version, about = "Multichannel blind deconvolution under long-memory noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the scenario-driven commands. They override the file.
#[derive(Debug, Args)]
struct Overrides {
    /// Scenario file (TOML). The built-in default scenario when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Debug, Args)]
struct Tuning {
    #[arg(long)]
    rho1: Option<f64>,
    #[arg(long)]
    rho2: Option<f64>,
    #[arg(long)]
    k_trunc: Option<f64>,
    /// Besov radius surrogate used in level selection.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    m0: Option<u32>,
    /// Exclusive finest level.
    #[arg(long)]
    j: Option<u32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one replication of observations and store it as JSON.
    Simulate {
        #[command(flatten)]
        overrides: Overrides,
        /// Per-sample signal noise level.
        #[arg(long)]
        eps: f64,
        /// Per-sample kernel noise level; follows the scenario coupling when omitted.
        #[arg(long)]
        delta: Option<f64>,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the estimator on stored observations or on a fresh simulation.
    Estimate {
        /// Observations written by `simulate`.
        #[arg(long, conflicts_with_all = ["eps", "delta"])]
        input: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, required_unless_present = "input")]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        tuning: Tuning,
        /// Write the reconstruction as CSV (`t,f_hat[,f]`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print the per-level trace.
        #[arg(long)]
        trace: bool,
    },
    /// Monte Carlo rate experiment over the scenario's noise grid.
    Rates {
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory for `rates.csv` and `rates.json`; CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write `rates.svg`.
        #[arg(long, requires = "out")]
        svg: bool,
        /// Scale factors for a sensitivity sweep of the tuning constants.
        #[arg(long, value_delimiter = ',', requires = "out")]
        sweep: Option<Vec<f64>>,
    },
    /// Print theoretical risk exponents as JSON.
    Exponent {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        /// Kernel decay per channel.
        #[arg(long, value_delimiter = ',', required = true)]
        nu: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        alpha1: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        alpha2: Vec<f64>,
    },
    /// Compare sampled fractional Gaussian noise with its exact covariance.
    FgnCheck {
        #[arg(long)]
        hurst: f64,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
    },
    /// Estimate the Hurst exponent of a series (one number per line or comma separated).
    Hurst {
        input: PathBuf,
        /// Difference the series first (for records carrying a smooth trend).
        #[arg(long)]
        differenced: bool,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<blindwave::Error>() {
        return if e.is_configuration() {
            EXIT_CONFIG
        } else {
            EXIT_RUNTIME
        };
    }
    if err.downcast_ref::<commands::ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    EXIT_RUNTIME
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
