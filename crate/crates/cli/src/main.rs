use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spdflow::{Geometry, ModelKind, ReductionKind, Restriction};

mod commands;
mod config;

use commands::AttractorPolicy;
use config::ConfigError;

#[derive(Parser, Debug)]
#[command(
    name = "spdflow",
    version,
    about = "Time-series models for covariance matrices on the SPD manifold"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Window a multichannel signal into covariances and reduce their dimension.
    Reduce(ReduceArgs),
    /// Fit scalar or diagonal models to one or more covariance series.
    Fit(FitArgs),
    /// Simulate a covariance series from model parameters.
    Simulate(SimulateArgs),
    /// Mahalanobis distances and MDS between scalar fits.
    Compare(CompareArgs),
    /// Direction cosines, tangent PCA, Fréchet mean and distance MDS of a series.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug, Default)]
pub struct ReduceArgs {
    /// Signal file (.csv with a header of channel names, or raw f64 with a .json sidecar).
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Optional interictal signal reduced with the same plan.
    #[arg(long)]
    pub interictal_signal: Option<PathBuf>,
    /// Sampling rate in Hz (CSV signals).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Window length in seconds.
    #[arg(long)]
    pub window: Option<f64>,
    /// Reduced dimension.
    #[arg(long)]
    pub p: Option<usize>,
    /// variance-max or greedy-min-eig.
    #[arg(long)]
    pub reduction: Option<ReductionKind>,
    /// Reuse an existing plan instead of computing one.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct FitArgs {
    /// Covariance series files; several are fitted concurrently.
    #[arg(long, num_args = 1..)]
    pub series: Vec<PathBuf>,
    #[arg(long)]
    pub geometry: Option<Geometry>,
    /// Fixed lag L.
    #[arg(long)]
    pub lag: Option<usize>,
    /// Choose L in 1..=lag-max by significance of the top coefficient.
    #[arg(long)]
    pub lag_max: Option<usize>,
    /// scalar or diagonal.
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// full, no-alpha or no-beta.
    #[arg(long)]
    pub restrict: Option<Restriction>,
    /// interictal-mean, own-mean or file.
    #[arg(long)]
    pub attractor: Option<AttractorPolicy>,
    /// Attractor matrix JSON for the file policy.
    #[arg(long)]
    pub attractor_file: Option<PathBuf>,
    /// Interictal series for the interictal-mean policy.
    #[arg(long)]
    pub interictal: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SimulateArgs {
    /// Parameter JSON, or a fit JSON whose estimates are used.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Number of points, seed history included.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Series whose first L+1 points seed the simulation (default: the attractor repeated).
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Output series file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct CompareArgs {
    /// Scalar fit files sharing the same lag.
    #[arg(long, num_args = 1..)]
    pub fits: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long)]
    pub geometry: Option<Geometry>,
    /// Number of tangent principal components.
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("SPDFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        ConfigError(format!(
            "SPDFLOW_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("SPDFLOW_THREADS: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads()
        .map_err(anyhow::Error::from)
        .and_then(|()| match cli.command {
            Command::Reduce(a) => commands::reduce::run(a),
            Command::Fit(a) => commands::fit::run(a),
            Command::Simulate(a) => commands::simulate::run(a),
            Command::Compare(a) => commands::compare::run(a),
            Command::Diagnose(a) => commands::diagnose::run(a),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
