mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Supply-chain exposure, survival simulation, subsidy policy and
/// trade-equilibrium tools.
#[derive(Debug, Parser)]
#[command(name = "gsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Foreign input and market reliance from an input-output table.
    #[command(subcommand)]
    Exposure(ExposureCommand),
    /// Simulate one scenario cell.
    Simulate(SimArgs),
    /// Simulate all 18 scenario cells.
    Grid(SimArgs),
    /// Choose subsidies and compute Monte Carlo bands for every uncertainty mode.
    Policy(PolicyArgs),
    /// Solve the multi-country equilibrium.
    #[command(subcommand)]
    Equilibrium(EquilibriumCommand),
    /// Fit technologies and trade costs to a table's share moments.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Subcommand)]
enum ExposureCommand {
    Fir(ExposureArgs),
    Fmr(ExposureArgs),
    /// Change in exposure between two tables.
    Delta(DeltaArgs),
}

#[derive(Debug, Args)]
struct ExposureArgs {
    /// Directory holding the four table files.
    #[arg(long)]
    wiot: PathBuf,
    /// `all` or a comma-separated list of sector codes.
    #[arg(long, default_value = "all")]
    sectors: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Decimal places in the output.
    #[arg(long, default_value_t = 1)]
    digits: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Metric {
    Fir,
    Fmr,
}

#[derive(Debug, Args)]
struct DeltaArgs {
    /// Earlier and later table directories, in that order.
    #[arg(long, num_args = 1, required = true)]
    wiot: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "fir")]
    metric: Metric,
    #[arg(long, default_value = "all")]
    sectors: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    digits: usize,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// JSON file with `params`, `shocks` and, for `simulate`, `scenario`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// JSON file with `params`, `shocks` and `policy`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum EquilibriumCommand {
    /// Wages, prices and composite costs.
    Solve(EconArgs),
    /// Write the model's input-output table into the `--out` directory.
    Wiot(EconArgs),
    /// Real wages computed directly and from domestic-chain shares.
    Gains(EconArgs),
}

#[derive(Debug, Args)]
struct EconArgs {
    /// JSON world-economy file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// JSON world-economy file used as the starting point.
    #[arg(long)]
    config: PathBuf,
    /// Table whose share moments are targeted.
    #[arg(long)]
    wiot: PathBuf,
    #[arg(long, default_value_t = gsc_core::equilibrium::DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

const USAGE_EXIT: u8 = 64;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GSC_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE_EXIT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
