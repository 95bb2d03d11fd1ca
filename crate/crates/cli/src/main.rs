//! Command-line front end: solvers, experiment presets, NMF training and
//! chain analysis, emitting deterministic JSON/CSV artifacts.

mod analyze;
mod artifacts;
mod experiment;
mod nmf_cmd;
mod raster;
mod solve;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit codes: 0 success, 2 configuration error, 3 input-data error,
/// 4 numerical failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

/// Classify a core error raised while loading input files.
pub fn data_err(err: gibbs_ot::Error) -> CliError {
    CliError::Data(err.to_string())
}

/// Classify a core error raised while running a solver.
pub fn run_err(err: gibbs_ot::Error) -> CliError {
    match err {
        gibbs_ot::Error::SolverStall(_) => CliError::Numerical(err.to_string()),
        gibbs_ot::Error::InvalidParameter(_) => CliError::Config(err.to_string()),
        other => CliError::Data(other.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Gibbs,
    Sinkhorn,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Toy1d,
    Coulomb1d,
}

#[derive(Parser)]
#[command(
    name = "gibbs-ot",
    about = "Annealed Gibbs sampling for dual optimal transport, with exact and entropic baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one transport problem and emit plan, trace and summary.
    Solve(SolveArgs),
    /// Run a named experiment preset over the standard iteration budgets.
    Experiment(ExperimentArgs),
    /// Train Wasserstein NMF on a directory of grayscale rasters.
    Nmf(NmfArgs),
    /// Replay a chain checkpoint, emitting per-sweep annealing analysis.
    Analyze(AnalyzeArgs),
}

#[derive(clap::Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    /// First marginal (measure JSON).
    #[arg(long)]
    pub p: PathBuf,
    /// Second marginal (measure JSON).
    #[arg(long)]
    pub q: PathBuf,
    /// Cost matrix (CSV, row-major, no header).
    #[arg(long)]
    pub cost: PathBuf,
    /// Sweep budget (gibbs) or iteration cap (sinkhorn).
    #[arg(long)]
    pub iters: Option<u32>,
    /// geometric:T0,l=SWEEPS[,n=GRID] | adaptive:ETA | constant:T
    #[arg(long)]
    pub schedule: Option<String>,
    /// Entropic regularization strength (sinkhorn).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mixing-diagnostic lag (recorded in metadata).
    #[arg(long, default_value_t = 5)]
    pub tau: u32,
    /// Also solve exactly and report the relative gap.
    #[arg(long)]
    pub with_exact: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(clap::Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Baseline regularization; defaults to 0.5/N.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(clap::Args)]
pub struct NmfArgs {
    /// Directory of .pgm / .csv rasters with uniform dimensions.
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long, short = 'k', default_value_t = 40)]
    pub k: usize,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 30)]
    pub epochs: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub tau: u32,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(clap::Args)]
pub struct AnalyzeArgs {
    /// Chain checkpoint JSON.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub p: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
    #[arg(long)]
    pub cost: PathBuf,
    /// Overrides the checkpoint's embedded schedule.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Sweeps to replay.
    #[arg(long, default_value_t = 1)]
    pub iters: u32,
    /// Deviation K of the concentration bounds.
    #[arg(long)]
    pub bound_k: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub bound_eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub bound_gamma: f64,
    /// Constant per-step bound a_n.
    #[arg(long, default_value_t = 1.0)]
    pub bound_a: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parses `geometric:T0,l=SWEEPS[,n=GRID]`, `adaptive:ETA`, `constant:T`.
/// `grid_default` fills in the grid size when the spec omits it.
pub fn parse_schedule(
    spec: &str,
    grid_default: u32,
) -> Result<gibbs_ot::TemperatureSchedule, CliError> {
    use gibbs_ot::TemperatureSchedule;
    let bad = |msg: &str| CliError::Config(format!("bad --schedule '{spec}': {msg}"));
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("expected kind:params"))?;
    match kind {
        "geometric" => {
            let mut t0 = None;
            let mut l = None;
            let mut grid = grid_default;
            for (idx, part) in rest.split(',').enumerate() {
                if let Some(v) = part.strip_prefix("l=") {
                    l = Some(v.parse::<u32>().map_err(|e| bad(&e.to_string()))?);
                } else if let Some(v) = part.strip_prefix("n=") {
                    grid = v.parse::<u32>().map_err(|e| bad(&e.to_string()))?;
                } else if idx == 0 {
                    t0 = Some(part.parse::<f64>().map_err(|e| bad(&e.to_string()))?);
                } else {
                    return Err(bad("expected T0, l=SWEEPS, optional n=GRID"));
                }
            }
            let t0 = t0.ok_or_else(|| bad("missing T0"))?;
            let l = l.ok_or_else(|| bad("missing l=SWEEPS"))?;
            TemperatureSchedule::geometric(t0, l, grid).map_err(|e| bad(&e.to_string()))
        }
        "adaptive" => {
            let eta = rest.parse::<f64>().map_err(|e| bad(&e.to_string()))?;
            TemperatureSchedule::adaptive(eta).map_err(|e| bad(&e.to_string()))
        }
        "constant" => {
            let t = rest.parse::<f64>().map_err(|e| bad(&e.to_string()))?;
            TemperatureSchedule::constant(t).map_err(|e| bad(&e.to_string()))
        }
        other => Err(bad(&format!("unknown kind '{other}'"))),
    }
}

fn main() -> ExitCode {
    gibbs_ot::parallel::init_global_pool(gibbs_ot::parallel::threads_from_env());
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve::run(&args),
        Command::Experiment(args) => experiment::run(&args),
        Command::Nmf(args) => nmf_cmd::run(&args),
        Command::Analyze(args) => analyze::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
