//! Command-line front end for the simulation library: runs the bundled
//! experiment grids and writes CSV rows plus a JSON summary.
//!
//! Exit codes: 0 on success, 1 for malformed configs, infeasible budgets, or
//! I/O failures (message on stderr), 2 for command-line usage errors.

mod grid;
mod netruns;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pfrsim",
    version,
    about = "Exact channel-simulation and private-compression experiments",
    after_help = "Every experiment derives all randomness from the configured \
seed, so reruns reproduce every numeric column except wall-clock times. Set \
RAYON_NUM_THREADS to bound the worker pool (results do not depend on it)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Distributed mean estimation over an (eps x budget x mechanism) grid.
    Dme(GridArgs),
    /// Metric-privacy comparison (compressed mechanism vs. quantized
    /// baseline) over an (eps x budget) grid.
    Metric(GridArgs),
    /// One-shot network-coding presets: simulate and compare to the
    /// computable bound.
    Adn(AdnArgs),
    /// Information-hiding and wiretap instances: simulate and compare to
    /// the analytic caps.
    Secrecy(SecrecyArgs),
    /// Timing probe for the chunked encoder (machine-dependent; logged, not
    /// asserted).
    PprBench(BenchArgs),
}

/// Arguments shared by the grid-driven subcommands.
#[derive(Args)]
pub struct GridArgs {
    /// JSON grid configuration; see the README for the schema.
    #[arg(long)]
    pub config: PathBuf,
    /// CSV output path.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON summary path; written to stdout when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct AdnArgs {
    /// Preset name (repeatable); defaults to all seven presets.
    #[arg(long = "preset")]
    pub presets: Vec<String>,
    /// Monte-Carlo trials per preset [default: 100000].
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed [default: 2024].
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path; written to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional JSON config {"presets": [..], "trials": n, "seed": n};
    /// explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SecrecyScheme {
    Hiding,
    Wiretap,
    Both,
}

#[derive(Args)]
pub struct SecrecyArgs {
    /// Which family of instances to run.
    #[arg(long, value_enum, default_value_t = SecrecyScheme::Both)]
    pub scheme: SecrecyScheme,
    /// Monte-Carlo trials per instance/attack.
    #[arg(long, default_value_t = 20_000)]
    pub trials: u64,
    /// Master seed.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// CSV output path; written to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Index-selection sharpness.
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Chunk width to probe.
    #[arg(long, default_value_t = 4)]
    pub chunk: usize,
    /// Requested central epsilon.
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Per-client bit budget driving the working epsilon.
    #[arg(long, default_value_t = 50)]
    pub budget: u64,
    /// Number of timed encodes.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Clients assumed by the calibration.
    #[arg(long, default_value_t = 500)]
    pub n: u64,
    /// Vector dimension assumed by the calibration.
    #[arg(long, default_value_t = 1000)]
    pub d: usize,
    /// Master seed.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Dme(args) => grid::run_dme(&args),
        Cmd::Metric(args) => grid::run_metric(&args),
        Cmd::Adn(args) => netruns::run_adn(&args),
        Cmd::Secrecy(args) => netruns::run_secrecy(&args),
        Cmd::PprBench(args) => netruns::run_bench(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
