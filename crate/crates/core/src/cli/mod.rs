//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or contract error, 3 numerical
//! failure, 4 finished with warnings (sweep gaps, clipped grids, residual
//! warnings, shutdowns). Output files are written atomically; CSV floats
//! carry 17 significant digits and console summaries 6.

mod commands;
mod config;

pub use config::{
    parse_rank_tol, EigenConfig, FdConfig, GridConfig, PointChoice, RunConfig, ScenarioConfig,
    TsSpec, OUT_DIR_ENV,
};

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::PathBuf;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_WARNINGS: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{stage} failed: {message}")]
    Numerical {
        stage: &'static str,
        message: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
        }
    }

    pub(crate) fn numerical(stage: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Numerical {
            stage,
            message: e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "linspect",
    version,
    about = "Linearize plant simulators and audit the linear models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Linearize a catalog plant into continuous and/or discrete model files.
    Linearize(LinearizeArgs),
    /// Eigenvalue table of a model file.
    Eig(EigArgs),
    /// Condition-number and rank sweeps over frequency.
    Sweep(SweepArgs),
    /// Compare linear models against the nonlinear plant.
    Compare(CompareArgs),
    /// Simulate a catalog plant and write its trace.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the LINSPECT_OUT_DIR variable and the config).
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LinearizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub plant: Option<String>,
    /// Continuous model only.
    #[arg(long, conflicts_with_all = ["dt", "both"])]
    pub ct: bool,
    /// Discrete model only.
    #[arg(long, conflicts_with = "both")]
    pub dt: bool,
    /// Continuous and discrete models.
    #[arg(long)]
    pub both: bool,
    /// Sampling period in hours, or "auto".
    #[arg(long)]
    pub ts: Option<String>,
    #[arg(long, value_enum)]
    pub op: Option<OpArg>,
    #[arg(long)]
    pub step_factor: Option<f64>,
    #[arg(long)]
    pub step_floor: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OpArg {
    Nominal,
    Trim,
}

#[derive(Args, Debug)]
pub struct EigArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub cluster_tol: Option<f64>,
    #[arg(long)]
    pub tol_int: Option<f64>,
    #[arg(long)]
    pub tol_stab: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Condition,
    Rank,
    Both,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: SweepMode,
    /// Lowest frequency in rad/h.
    #[arg(long)]
    pub grid_min: Option<f64>,
    /// Highest frequency in rad/h.
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// "default" or an absolute singular-value threshold.
    #[arg(long)]
    pub rank_tol: Option<String>,
}

/// Flags shared by the commands that run the nonlinear plant.
#[derive(Args, Debug)]
pub struct ScenarioArgs {
    /// Simulated hours.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Integrator step in hours.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Disable measurement noise.
    #[arg(long)]
    pub no_noise: bool,
    /// Input index for a single step change away from the operating point.
    #[arg(long, requires = "step_delta")]
    pub step_input: Option<usize>,
    /// Size of that step change.
    #[arg(long, requires = "step_input")]
    pub step_delta: Option<f64>,
    /// Time of that step change in hours.
    #[arg(long, default_value_t = 0.0)]
    pub step_at: f64,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Catalog plant; defaults to the plant recorded in the model files.
    #[arg(long)]
    pub plant: Option<String>,
    /// Model file; repeat for several models.
    #[arg(long = "model", value_name = "FILE")]
    pub models: Vec<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Nonlinear runs averaged (seeds seed, seed+1, ...).
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub plant: Option<String>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

/// What a successful command has to say beyond its files.
#[derive(Debug, Default)]
pub struct Outcome {
    pub warnings: Vec<String>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if outcome.warnings.is_empty() {
                EXIT_OK
            } else {
                EXIT_WARNINGS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Linearize(a) => commands::linearize(a),
        Command::Eig(a) => commands::eig(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Compare(a) => commands::compare(a),
        Command::Simulate(a) => commands::simulate(a),
    }
}
