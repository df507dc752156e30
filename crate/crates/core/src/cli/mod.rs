//! Command-line front end.
//!
//! Exit codes: 0 when the solve is optimal (or the certificate valid),
//! 1 for input errors, 2 when the solver or a verification falls short.

mod codec;
mod commands;
mod input;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::discrim::{Cone, DiscrimError, Mode};

pub use codec::{canonical, decode_certificate, decode_measurement, DENSE_MAX_ORDER};
pub use input::{resolve_set, SetSource, StateRecord, StateSetFile, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_OPTIMAL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Discrim(#[from] DiscrimError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => EXIT_INPUT,
            CliError::Discrim(e) => match e {
                DiscrimError::State(_)
                | DiscrimError::Exact(_)
                | DiscrimError::NotLattice
                | DiscrimError::MalformedCertificate(_)
                | DiscrimError::MalformedMeasurement(_) => EXIT_INPUT,
                DiscrimError::Conic(crate::conic::ConicError::InvalidProblem(_)) => EXIT_INPUT,
                _ => EXIT_NOT_OPTIMAL,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pptdiscrim",
    version,
    about = "Optimal PPT discrimination of orthogonal bipartite states"
)]
pub struct Cli {
    /// Solver duality-gap tolerance.
    #[arg(long, global = true, env = "PPTDISCRIM_TOL", value_parser = parse_tol)]
    pub tol: Option<f64>,
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal success probability of a PPT (or unrestricted) measurement.
    Solve(SolveArgs),
    /// Relaxed upper bound and, when applicable, the d/k bound.
    Bound(BoundArgs),
    /// Check a dual certificate against a state set.
    Certify(CertifyArgs),
    /// List the builtin state sets.
    Examples(ExamplesArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report as canonical JSON to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the summary table.
    #[arg(long)]
    pub json: bool,
    /// Always include dense operators, even for large lattice instances.
    #[arg(long)]
    pub dense: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Builtin set name or path to a state-set JSON file.
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value = "min-error")]
    pub mode: Mode,
    #[arg(long, default_value = "ppt")]
    pub cone: Cone,
    /// Use the full semidefinite program even for lattice instances.
    #[arg(long)]
    pub force_sdp: bool,
    /// Also verify the certificate with exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub force_sdp: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub set: String,
    /// A report or certificate file, `fixture:<name>`, or `Y=identity/<x>`.
    #[arg(long)]
    pub certificate: String,
    /// Decide every condition with exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    #[arg(long)]
    pub json: bool,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("tolerance must lie in (0, 1), got {s}"))
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    let mut stdout = std::io::stdout().lock();
    match commands::dispatch(&cli, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
