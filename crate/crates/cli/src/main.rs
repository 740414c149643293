//! `refuel`: solve, generate and benchmark station-location instances.

mod bench;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use refuel_core::SeparationVariant;

#[derive(Debug, Parser)]
#[command(
    name = "refuel",
    version,
    about = "Capacitated refueling station location with routing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Write a seeded random instance.
    Generate(GenerateArgs),
    /// Run formulations over a lambda/kappa grid.
    Bench(BenchArgs),
    /// Compare the two integer separation routines on uncapacitated instances.
    CompareSeparation(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formulation {
    Cf,
    Pf,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Cf => "cf",
            Formulation::Pf => "pf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Separation {
    Ours,
    Baseline,
}

impl From<Separation> for SeparationVariant {
    fn from(s: Separation) -> Self {
        match s {
            Separation::Ours => SeparationVariant::Ours,
            Separation::Baseline => SeparationVariant::Baseline,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    /// Wall-clock limit per solve, in seconds.
    #[arg(long, value_name = "SECONDS")]
    pub time_limit: Option<f64>,
    #[arg(long, value_name = "N")]
    pub node_limit: Option<usize>,
    /// Disable lifted cover inequalities.
    #[arg(long)]
    pub no_lci: bool,
    /// Price exactly instead of trying LARAC first.
    #[arg(long)]
    pub no_larac: bool,
    #[arg(long, value_enum, default_value = "ours")]
    pub separation: Separation,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 12)]
    pub stations: usize,
    #[arg(long, default_value_t = 6)]
    pub terminals: usize,
    #[arg(long, default_value_t = 8)]
    pub pairs: usize,
    #[arg(long, default_value_t = 80.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 1)]
    pub max_demand: u32,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "cf")]
    pub formulation: Formulation,
    /// Replace every station capacity by this value.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Recompute time bounds with this deviation tolerance.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Directory for `solution.json` and `results.csv`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorFlags,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    pub kappa: f64,
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Base instance; generated from the seed when absent.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cf,pf")]
    pub formulation: Vec<Formulation>,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,inf")]
    pub kappa: Vec<f64>,
    #[arg(long, value_name = "DIR", default_value = "bench-out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub generator: GeneratorFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.5")]
    pub lambda: Vec<f64>,
    /// Instances per lambda, seeded from `--seed` upwards.
    #[arg(long, default_value_t = 20)]
    pub count: u64,
    #[arg(long, value_name = "DIR", default_value = "compare-out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub generator: GeneratorFlags,
    #[arg(long, value_name = "SECONDS")]
    pub time_limit: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Generate(a) => commands::generate(&a),
        Command::Bench(a) => bench::bench(&a),
        Command::CompareSeparation(a) => bench::compare_separation(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
