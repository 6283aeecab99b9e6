//! `collab-activity`: build networks, preprocess logs, fit ratios, simulate
//! and report robustness metrics, all from files.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical failure.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collab_activity::estimate::ObjectiveKind;
use collab_activity::graph::NetworkMode;
use collab_activity::synth::ScenarioKind;

use crate::commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "collab-activity", version, about = "Collaboration activity dynamics toolkit")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a collaboration network from an event log.
    Ingest(IngestArgs),
    /// Report size and spectral radius of a network.
    Analyze(AnalyzeArgs),
    /// Turn an event log into a smoothed weekly activity series.
    Preprocess(PreprocessArgs),
    /// Fit one ratio per sliding window.
    Estimate(EstimateArgs),
    /// Integrate the dynamics on a network.
    Simulate(SimulateArgs),
    /// System mass and activity momentum from a ratio series.
    Metrics(MetricsArgs),
    /// Write a synthetic scenario on the Karate Club network.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
pub struct NetworkArgs {
    /// Edge list, one `a<TAB>b` pair per line.
    #[arg(long, required_unless_present = "karate")]
    pub network: Option<PathBuf>,
    /// JSON summary written by `ingest`; adds isolated users.
    #[arg(long, requires = "network")]
    pub sidecar: Option<PathBuf>,
    /// Use the built-in Karate Club network.
    #[arg(long, conflicts_with = "network")]
    pub karate: bool,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// CSV with header timestamp,user,kind,artifact,parent.
    #[arg(long)]
    pub events: PathBuf,
    /// qa or wiki.
    #[arg(long, default_value = "qa")]
    pub mode: NetworkMode,
    /// Writes `<prefix>.tsv` and `<prefix>.json`.
    #[arg(long, default_value = "network")]
    pub out_prefix: PathBuf,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Power-iteration residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Write the JSON summary here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long, default_value = "activity.csv")]
    pub out: PathBuf,
    /// Also write unsmoothed weekly totals.
    #[arg(long)]
    pub raw_out: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub rolling_days: usize,
    #[arg(long, default_value_t = 1.0)]
    pub min_total: f64,
    #[arg(long, default_value_t = 52)]
    pub window_weeks: usize,
    #[arg(long, default_value_t = 3)]
    pub lead_weeks: usize,
}

/// Estimation settings settable from the command line; they override the
/// config file.
#[derive(Args, Debug, Clone, Default)]
pub struct FitFlags {
    /// Weeks per fit window.
    #[arg(long = "T")]
    pub window_weeks: Option<usize>,
    /// Gradient step size.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Use plain gradient steps only.
    #[arg(long)]
    pub no_newton: bool,
    #[arg(long)]
    pub ratio_init: Option<f64>,
    #[arg(long)]
    pub dtau: Option<f64>,
    #[arg(long)]
    pub tau_per_step: Option<f64>,
    /// aggregate or peruser.
    #[arg(long)]
    pub objective: Option<ObjectiveKind>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Activity CSV (user,week_start,value).
    #[arg(long)]
    pub activity: PathBuf,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub fit: FitFlags,
    #[arg(long, default_value = "ratios.csv")]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Constant ratio for every week.
    #[arg(long, required_unless_present = "ratios", conflicts_with = "ratios")]
    pub ratio: Option<f64>,
    /// Ratio CSV from `estimate`; week k uses the k-th fitted ratio.
    #[arg(long)]
    pub ratios: Option<PathBuf>,
    /// `random`, or a CSV with header user,value.
    #[arg(long, default_value = "random")]
    pub init: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Range of random initial activity.
    #[arg(long, default_value_t = 0.0)]
    pub init_low: f64,
    #[arg(long, default_value_t = 0.1)]
    pub init_high: f64,
    /// Observation steps; defaults to the number of ratios with --ratios.
    #[arg(long)]
    pub weeks: Option<usize>,
    #[arg(long)]
    pub dtau: Option<f64>,
    #[arg(long)]
    pub tau_per_step: Option<f64>,
    /// Aggregate trace (step,tau,aggregate_activity).
    #[arg(long, default_value = "trace.csv")]
    pub out: PathBuf,
    /// Per-user trace.
    #[arg(long)]
    pub wide: Option<PathBuf>,
    /// JSON summary file; always printed to stdout.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long, required_unless_present = "rho")]
    pub ratios: Option<PathBuf>,
    /// Weekly activity; its weekly totals drive the momenta.
    #[arg(long, required_unless_present = "mean_activity")]
    pub activity: Option<PathBuf>,
    #[arg(long, required_unless_present = "rho")]
    pub kappa1: Option<f64>,
    /// Use this rho instead of computing it from ratios.
    #[arg(long, conflicts_with = "ratios")]
    pub rho: Option<f64>,
    /// Use these activity figures instead of an activity file.
    #[arg(long, requires = "last_month_activity", conflicts_with = "activity")]
    pub mean_activity: Option<f64>,
    #[arg(long, requires = "mean_activity")]
    pub last_month_activity: Option<f64>,
    /// Row label in the table.
    #[arg(long, default_value = "dataset")]
    pub label: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// increasing, decreasing or variable.
    #[arg(long)]
    pub scenario: ScenarioKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// First-week aggregate (centre level for variable).
    #[arg(long, default_value_t = 20.0)]
    pub base: f64,
    /// Weekly change (fluctuation half-width for variable).
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value_t = 13)]
    pub weeks: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // --help and --version land here too
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    // Builder::new does not read RUST_LOG
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Preprocess(a) => commands::preprocess(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Synth(a) => commands::synth(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}
