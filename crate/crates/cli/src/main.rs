//! `harmonet`: variance-gamma energy statistics from the command line.

mod commands;
mod config;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harmonet::linalg::LinalgError;
use harmonet::networks::NetworkError;
use harmonet::ou::OuError;
use harmonet::statlab::StatError;
use harmonet::vargamma::VgError;
use thiserror::Error;

use config::{Grid, RunConfig, SpecDocument, Units, Window};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("statistical failure: {0}")]
    Statistical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Statistical(_) => 4,
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NotSquare { .. }
            | LinalgError::Shape(_)
            | LinalgError::NotSymmetric { .. }
            | LinalgError::NonFinite
            | LinalgError::TooLarge { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<VgError> for CliError {
    fn from(e: VgError) -> Self {
        match e {
            VgError::Linalg(inner) => inner.into(),
            VgError::Empty
            | VgError::NonPositiveLambda { .. }
            | VgError::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<OuError> for CliError {
    fn from(e: OuError) -> Self {
        match e {
            OuError::Linalg(inner) => inner.into(),
            OuError::Vg(inner) => inner.into(),
            OuError::Shape(_)
            | OuError::InvalidTime(_)
            | OuError::NonAscendingGrid { .. }
            | OuError::ObservableIndex { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::Linalg(inner) => inner.into(),
            NetworkError::Ou(inner) => inner.into(),
            NetworkError::Vg(inner) => inner.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<StatError> for CliError {
    fn from(e: StatError) -> Self {
        match e {
            StatError::Ou(inner) => inner.into(),
            StatError::Vg(inner) => inner.into(),
            StatError::TooFewTailPoints { .. } => CliError::Statistical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "harmonet",
    version,
    about = "Energy statistics of stochastic harmonic networks and RC circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Limit density on a grid (CSV).
    VgDensity(RunArgs),
    /// RC circuit report, limit density and optional Monte Carlo histogram.
    Rc(RunArgs),
    /// Harmonic network report: kinetic and total-energy laws, ϑ.
    Network(RunArgs),
    /// Large-deviation scan of `(1/t) log P(Q_t ∈ tO)`.
    Ldp(RunArgs),
    /// Cross-oracle self-test.
    Selftest(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON spec with one of `network`, `rc_circuit`, `vg`.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo draws.
    #[arg(long)]
    count: Option<usize>,
    /// Time lag for Monte Carlo sampling.
    #[arg(long = "t")]
    t: Option<f64>,
    /// Comma-separated increasing times.
    #[arg(long = "t-list", value_delimiter = ',')]
    t_list: Option<Vec<f64>>,
    /// `lo:hi:n` in output energy units.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<Grid>,
    /// LDP window `a,b` in output energy units per unit time.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Window>,
    /// Output energy units; defaults to the spec's `units`.
    #[arg(long, value_enum)]
    units: Option<Units>,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    /// Multiplies every self-test tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

fn build_config(name: &str, args: RunArgs) -> Result<RunConfig, CliError> {
    let spec = args.spec.as_deref().map(SpecDocument::load).transpose()?;
    if args.workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    if args.count == Some(0) {
        return Err(CliError::Config("--count must be at least 1".into()));
    }
    if let Some(t) = args.t {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Config(format!(
                "--t must be finite and >= 0 (got {t})"
            )));
        }
    }
    if let Some(ts) = &args.t_list {
        if ts.is_empty()
            || ts.iter().any(|t| !(t.is_finite() && *t > 0.0))
            || ts.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(CliError::Config(
                "--t-list must be positive and strictly increasing".into(),
            ));
        }
    }
    if !(args.tol_scale.is_finite() && args.tol_scale > 0.0) {
        return Err(CliError::Config("--tol-scale must be positive".into()));
    }
    let default_count = if name == "ldp" { 1_000_000 } else { 100_000 };
    Ok(RunConfig {
        command: name.into(),
        seed: args
            .seed
            .or(spec.as_ref().and_then(|s| s.seed))
            .unwrap_or(0),
        units: args
            .units
            .or(spec.as_ref().map(|s| s.units))
            .unwrap_or(Units::Si),
        spec_path: args.spec,
        spec,
        out: args.out,
        count: args.count.unwrap_or(default_count),
        t: args.t,
        t_list: args.t_list,
        grid: args.grid,
        window: args.window,
        workers: args.workers,
        tol_scale: args.tol_scale,
        version: env!("CARGO_PKG_VERSION"),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, args) = match cli.command {
        Command::VgDensity(a) => ("vg-density", a),
        Command::Rc(a) => ("rc", a),
        Command::Network(a) => ("network", a),
        Command::Ldp(a) => ("ldp", a),
        Command::Selftest(a) => ("selftest", a),
    };
    let config = build_config(name, args)?;
    match name {
        "selftest" => selftest::run(&config),
        "vg-density" => commands::vg_density(&config),
        "rc" => commands::rc(&config),
        "network" => commands::network(&config),
        _ => commands::ldp(&config),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("harmonet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
