//! The `dhtrng` command-line front end.
//!
//! Exit status: 0 all verdicts pass, 1 a test failed, 2 usage or
//! configuration error, 3 insufficient data, 4 simulation fault.

mod analyze;
mod commands;
pub mod config;
pub mod image;
pub mod report;
pub mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::bits::{BitFormat, BitsError};
use crate::circuit::CircuitError;
use crate::stats::StatsError;

pub use config::{ExperimentConfig, ReportFormat};
pub use sweep::{SweepAxis, SweepRow, SweepSpec};

pub const SEED_ENV: &str = "DHTRNG_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Write(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::NotApplicable => "not applicable",
        })
    }
}

impl CliError {
    pub(crate) fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Config(m) => m.clone(),
            other => other.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Circuit(e) if e.is_fault() => 4,
            CliError::Stats(StatsError::Simulation(e)) if e.is_fault() => 4,
            CliError::Stats(StatsError::InsufficientData { .. }) => 3,
            _ => 2,
        }
    }
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::NotApplicable => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dhtrng",
    version,
    about = "Stochastic simulator and randomness test bench for a hybrid ring-oscillator TRNG"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Experiment configuration file (flat key=value).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Noise seed; overrides the config file and DHTRNG_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of worker threads for multi-stream work.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the generator and write the bitstream.
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bits: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// bin or txt; defaults to the output file extension.
        #[arg(long)]
        format: Option<BitFormat>,
    },
    /// Run test batteries on a stream file, or on freshly generated streams.
    Test {
        /// Bitstream file (.bin or .txt). Without it, `experiment.streams`
        /// streams are simulated from the configuration.
        stream: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Comma-separated: ais, nist, entropy, acf, bias, all.
        #[arg(long)]
        battery: Option<String>,
        #[arg(long)]
        bits: Option<usize>,
        #[arg(long)]
        report: Option<ReportFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter and tabulate min-entropy, bias and ACF.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// temperature, voltage, xor_count or ro1_stages.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated list, or an inclusive integer range `a..b`.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        bits: Option<usize>,
        #[arg(long)]
        report: Option<ReportFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Restart the generator several times and compare output prefixes.
    Restart {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        trials: usize,
        #[arg(long, default_value_t = 32)]
        prefix_bits: usize,
        /// Reuse one seed for every trial (negative control).
        #[arg(long)]
        same_seed: bool,
        #[arg(long)]
        report: Option<ReportFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a stream as a binary PGM image.
    Image {
        stream: PathBuf,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        #[arg(long)]
        out: PathBuf,
        /// Draw one bits white instead of black.
        #[arg(long)]
        invert: bool,
    },
    /// Evaluate a closed-form model: xor2, xorn, coverage, phasenoise, bias.
    Analyze {
        formula: String,
        /// key=value parameters.
        params: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Generate {
            common,
            bits,
            out,
            format,
        } => commands::generate(&common, bits, &out, format),
        Command::Test {
            stream,
            common,
            battery,
            bits,
            report,
            out,
        } => commands::test(
            stream.as_deref(),
            &common,
            battery.as_deref(),
            bits,
            report,
            out.as_deref(),
        ),
        Command::Sweep {
            common,
            axis,
            values,
            repeats,
            bits,
            report,
            out,
        } => commands::sweep(&common, axis, &values, repeats, bits, report, out.as_deref()),
        Command::Restart {
            common,
            trials,
            prefix_bits,
            same_seed,
            report,
            out,
        } => commands::restart(&common, trials, prefix_bits, same_seed, report, out.as_deref()),
        Command::Image {
            stream,
            width,
            height,
            out,
            invert,
        } => commands::image(&stream, width, height, &out, invert),
        Command::Analyze { formula, params, seed } => analyze::analyze(&formula, &params, seed),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("dhtrng: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
