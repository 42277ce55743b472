//! Command-line front end.
//!
//! Every subcommand reads an optional JSON [`RunConfig`] via `--config` and
//! lets flags override individual keys, so a config file and the equivalent
//! flags produce the same bytes. [`run`] returns the output instead of
//! printing it, which keeps the front end testable in-process.

mod commands;
pub mod config;
pub mod format;
pub mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

use crate::error::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "EXWALK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "exwalk", version, about = "Speeds of random walks excited by their recent history")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact speed of a finite-window walk.
    Speed(SpeedArgs),
    /// Limiting speed as the window grows with fixed threshold fractions.
    Limit(LimitArgs),
    /// Critical fraction of a single-threshold walk.
    Rstar(RstarArgs),
    /// Exact (and optionally limiting) speed over a one- or two-axis grid, as CSV.
    Sweep(SweepArgs),
    /// Monte Carlo estimate of the speed, or a census of late increments.
    Simulate(SimulateArgs),
    /// Walk driven by a response function G and its variational limit.
    Gmodel(GmodelArgs),
    /// Stationary measure of the window chain.
    Stationary(StationaryArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// JSON file with parameters; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    /// History window.
    #[arg(long = "N")]
    pub window: Option<u64>,
    /// Thresholds M_1,...,M_l.
    #[arg(long = "M", value_delimiter = ',')]
    pub thresholds: Option<Vec<u64>>,
    /// Probabilities p_0,...,p_l.
    #[arg(long = "p", value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    /// Allow equal consecutive probabilities.
    #[arg(long)]
    pub relaxed: bool,
}

#[derive(Debug, Args)]
pub struct SpeedArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub ladder: LadderArgs,
    /// Also print per-band masses.
    #[arg(long)]
    pub breakdown: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long = "p", value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    /// Threshold fractions r_1,...,r_l.
    #[arg(long = "r", value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    /// Integer offsets c_k = M_k - r_k N, one per fraction.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Option<Vec<i64>>,
    /// Explicit tie weights, one per band; `inf` allowed.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<String>>,
    #[arg(long)]
    pub relaxed: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RstarArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// The pair p_0,p_1.
    #[arg(long = "p", value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub ladder: LadderArgs,
    /// Threshold fractions; thresholds become round(r N).
    #[arg(long = "r", value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    /// `name=from:to:count[:log]` or `name=v1,v2,...`; names are N, M1.., r1.., p0..
    #[arg(long = "axis")]
    pub axes: Vec<String>,
    /// Add the limiting-speed column.
    #[arg(long)]
    pub limit: bool,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub ladder: LadderArgs,
    /// Jumps per replica, initial window included; accepts 1e7.
    #[arg(long, value_parser = config::parse_count)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Record increments after a burn-in instead of estimating the speed.
    #[arg(long)]
    pub census: bool,
    /// Census burn-in, in steps after the initial window.
    #[arg(long = "T", value_parser = config::parse_count)]
    pub burn_in: Option<u64>,
    /// Census length, in increments per replica.
    #[arg(long = "m", value_parser = config::parse_count)]
    pub census_window: Option<u64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GmodelArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// G(x) = rho0 + (rho1 - rho0) x.
    #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with = "table")]
    pub linear: Option<Vec<f64>>,
    /// CSV with a header row and columns x,G.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Windows at which to also print the exact speed.
    #[arg(long = "N", value_delimiter = ',')]
    pub windows: Option<Vec<u64>>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub ladder: LadderArgs,
}

/// What a command produced: text for each stream and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn success(stdout: String) -> Self {
        Self { stdout, stderr: String::new(), code: 0 }
    }

    fn failure(err: &Error) -> Self {
        let stderr = match err {
            Error::Invalid(violations) => violations.iter().map(|v| format!("error: {v}\n")).collect(),
            other => format!("error: {other}\n"),
        };
        Self { stdout: String::new(), stderr, code: err.exit_code() }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(None) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::Usage(format!("cannot start {threads} threads: {e}")))
}

/// Executes an already parsed command.
pub fn execute(cli: Cli) -> Outcome {
    let result = thread_pool().and_then(|pool| match pool {
        Some(pool) => pool.install(|| commands::dispatch(cli.command)),
        None => commands::dispatch(cli.command),
    });
    match result {
        Ok(out) => Outcome::success(out),
        Err(e) => Outcome::failure(&e),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome { stdout: String::new(), stderr: text, code: 2 }
            } else {
                Outcome::success(text)
            }
        }
    }
}
