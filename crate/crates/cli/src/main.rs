//! meltkit: a benchmark harness for gap-filled surface-melt rasters.

mod commands;
mod error;
mod model;
mod report_file;
mod util;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::CliResult;
use crate::util::ConfigFile;

#[derive(Parser)]
#[command(
    name = "meltkit",
    version,
    about = "Generate, derive, split, fit, predict, and score gap-filled surface-melt rasters"
)]
struct Cli {
    /// JSON config file providing defaults for common flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Cap the worker thread pool.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic synthetic dataset.
    GenSynth(commands::gen_synth::GenSynthArgs),
    /// Convert a single-band float GeoTIFF to MWBR.
    ImportGeotiff(commands::import_geotiff::ImportGeotiffArgs),
    /// Derive daily melt fractions from backscatter scenes.
    DeriveSar(commands::derive_sar::DeriveSarArgs),
    /// Create a stratified train/val/test split.
    MakeSplit(commands::make_split::MakeSplitArgs),
    /// Fit a baseline model on the training split.
    Fit(commands::fit::FitArgs),
    /// Write prediction rasters for selected dates.
    Predict(commands::predict::PredictArgs),
    /// Score predictions against the reference and write a report.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Predict every day in a range and tabulate melt extent.
    DailyProduct(commands::daily_product::DailyProductArgs),
    /// Merge evaluation reports into one results table.
    Report(commands::report::ReportArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    if let Some(threads) = cli.threads.or(cfg.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| error::config_err(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::GenSynth(args) => commands::gen_synth::run(args, &cfg),
        Command::ImportGeotiff(args) => commands::import_geotiff::run(args, &cfg),
        Command::DeriveSar(args) => commands::derive_sar::run(args, &cfg),
        Command::MakeSplit(args) => commands::make_split::run(args, &cfg),
        Command::Fit(args) => commands::fit::run(args, &cfg),
        Command::Predict(args) => commands::predict::run(args, &cfg),
        Command::Evaluate(args) => commands::evaluate::run(args, &cfg),
        Command::DailyProduct(args) => commands::daily_product::run(args, &cfg),
        Command::Report(args) => commands::report::run(args, &cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
