//! `shaping4d`: batch front-end emitting plot-ready CSV and JSON.
//!
//! Exit codes: 0 success, 2 argument error, 3 validation error (bad input,
//! unknown format, unreadable or malformed file), 4 model-domain error.

mod commands;
mod range;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use range::{parse_count, SweepRange};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;
/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "SHAPING4D_THREADS";

#[derive(Parser, Debug)]
#[command(name = "shaping4d", version, about = "Four-dimensional constellation shaping toolkit")]
pub struct Cli {
    /// RNG seed for every Monte-Carlo estimate.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Monte-Carlo sample count (accepts `1e6`); each subcommand documents its default.
    #[arg(long, global = true, value_parser = parse_count)]
    pub samples: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output encoding.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Structural report: energy, moments, distance spectrum, Gray check, projections.
    Analyze {
        /// Built-in format name or constellation JSON file.
        constellation: String,
    },
    /// MI/GMI over an SNR range (default 1e6 samples).
    Air {
        constellation: String,
        /// SNR in dB, `start:stop:step` or a single value.
        #[arg(long, allow_hyphen_values = true)]
        snr: SweepRange,
        #[arg(long, value_enum, default_value_t = Estimator::Both)]
        estimator: Estimator,
    },
    /// Ring-switching family: generate, sweep or optimize `(r, theta)`.
    Prs {
        #[command(subcommand)]
        mode: PrsMode,
    },
    /// Joint POA/BSA optimization.
    Optimize(OptimizeArgs),
    /// Analytic link model.
    Link {
        #[command(subcommand)]
        mode: LinkMode,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    Mi,
    Gmi,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum PrsMode {
    /// Constellation JSON for given parameters.
    Gen {
        #[arg(long)]
        r: f64,
        /// Angle in degrees, in (0, 45).
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, default_value_t = 2.0)]
        es: f64,
    },
    /// GMI surface over a grid (default 1e5 samples per point).
    Sweep {
        #[arg(long)]
        snr: f64,
        #[arg(long)]
        r: SweepRange,
        #[arg(long)]
        theta: SweepRange,
    },
    /// Optimal `(r, theta)` for each SNR (default 1e5 samples per point).
    Opt {
        #[arg(long)]
        snr: SweepRange,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Symmetry {
    Free,
    Orthant,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Built-in format name or constellation JSON file.
    #[arg(long, default_value = "pm8qam")]
    pub init: String,
    #[arg(long, default_value_t = 8.0)]
    pub snr: f64,
    #[arg(long, value_enum, default_value_t = Symmetry::Free)]
    pub symmetry: Symmetry,
    /// POA pair updates per round (default 32 free, 6 orthant-locked).
    #[arg(long)]
    pub poa_iters: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub bsa_passes: usize,
    #[arg(long, default_value_t = 20)]
    pub outer_iters: usize,
    /// Frozen-noise samples per candidate evaluation; 0 selects the max-log surrogate.
    #[arg(long, default_value_t = 20_000)]
    pub surrogate_samples: usize,
    #[arg(long, default_value_t = 200)]
    pub poa_budget: usize,
    #[arg(long, default_value_t = 2.0)]
    pub es: f64,
    /// JSON-lines trace of accepted moves.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LinkCommon {
    /// Link configuration JSON; the shipped calibrated link when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated formats (built-in names or files).
    #[arg(long, value_delimiter = ',', default_value = "table1,pm8qam")]
    pub formats: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum LinkMode {
    /// Effective SNR versus launch power.
    Power {
        #[command(flatten)]
        common: LinkCommon,
        /// Launch power per channel in dBm.
        #[arg(long, allow_hyphen_values = true)]
        power: SweepRange,
        /// Override the configured span count.
        #[arg(long)]
        spans: Option<u32>,
    },
    /// GMI at the optimal launch power versus distance (default 2e5 samples
    /// per SNR point of the underlying AWGN curve).
    Distance {
        #[command(flatten)]
        common: LinkCommon,
        /// Distance in km; every value must be a multiple of the span length.
        #[arg(long)]
        distance: SweepRange,
        /// Report the distance at which each GMI curve drops to this value.
        #[arg(long)]
        reach_at: Option<f64>,
    },
    /// Print the shipped link configuration.
    Config,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Argument(String),
    Library(shaping4d::Error),
}

impl From<shaping4d::Error> for CliError {
    fn from(e: shaping4d::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Library(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Argument(_) => 2,
            CliError::Library(e) if e.is_model_domain() => 4,
            CliError::Library(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Argument(m) => write!(f, "argument error: {m}"),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Argument(format!("{THREADS_ENV}={v} is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Argument(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shaping4d: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
