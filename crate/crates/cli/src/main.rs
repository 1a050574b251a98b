//! `cmdp`: validate, solve and simulate consumption MDPs.
//!
//! Exit status is 0 on success, 1 on domain errors (invalid model, unknown
//! state, load above capacity, ...) and 2 on usage or parse errors.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser)]
#[command(name = "cmdp", version, about = "Strategy synthesis for consumption MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file; violations are reported on standard error.
    Validate { model: PathBuf },
    /// Compute minimal initial loads and a witness strategy.
    Solve(SolveArgs),
    /// Run a strategy file and estimate the expected reachability time.
    Simulate(SimulateArgs),
    /// Generate a grid-world model.
    Gridworld(GridworldArgs),
    /// Time the native Büchi solver against the explicit product on grids.
    Scaling(ScalingArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Safety,
    Posreach,
    Buchi,
    Asreach,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Heuristic {
    Standard,
    Goal,
    Threshold,
}

#[derive(Args)]
pub struct SolveArgs {
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub objective: Objective,
    /// Comma-separated target names; defaults to the model file's targets.
    #[arg(long)]
    pub targets: Option<String>,
    #[arg(long, value_enum, default_value = "standard")]
    pub heuristic: Heuristic,
    /// Probability threshold for `--heuristic threshold`.
    #[arg(long, value_parser = parse_theta)]
    pub theta: Option<f64>,
    /// Write the strategy as JSON to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Solve almost-sure reachability through the sink product.
    #[arg(long)]
    pub via_product: bool,
    /// Print the result as JSON (infinite values as null).
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct SimulateArgs {
    pub model: PathBuf,
    pub strategy: PathBuf,
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub load: u64,
    #[arg(long, default_value_t = 10_000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated target names; defaults to the model file's targets.
    #[arg(long)]
    pub targets: Option<String>,
    /// Write every episode as `episode,step,state,action,level` rows.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct GridworldArgs {
    #[arg(long)]
    pub size: usize,
    /// Reload cells as `row,col;row,col`.
    #[arg(long, default_value = "")]
    pub reloads: String,
    /// Target cells as `row,col;row,col`.
    #[arg(long, default_value = "")]
    pub targets: String,
    #[arg(long)]
    pub capacity: u64,
    /// Probability that a weak move reaches its intended cell.
    #[arg(long, default_value = "4/5")]
    pub p: String,
    #[arg(long, default_value_t = 1)]
    pub weak_cost: u64,
    #[arg(long, default_value_t = 2)]
    pub strong_cost: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_value = "10,20")]
    pub sizes: Vec<usize>,
    /// Capacities as multiples of the grid size.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,10")]
    pub factors: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Distance between reload cells.
    #[arg(long, default_value_t = 5)]
    pub spacing: usize,
    #[arg(long, value_enum, default_value = "buchi")]
    pub objective: Objective,
    /// Emit `objective,n,capacity,solver,mean_seconds` rows.
    #[arg(long)]
    pub csv: bool,
}

fn parse_theta(text: &str) -> Result<f64, String> {
    let theta: f64 = text.parse().map_err(|_| format!("`{text}` is not a number"))?;
    if (0.0..=1.0).contains(&theta) {
        Ok(theta)
    } else {
        Err(format!("theta {theta} is outside [0, 1]"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), CliError> = match cli.command {
        Command::Validate { model } => commands::validate(&model),
        Command::Solve(args) => commands::solve(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Gridworld(args) => commands::gridworld(&args),
        Command::Scaling(args) => commands::scaling(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
