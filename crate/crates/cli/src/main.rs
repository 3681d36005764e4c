//! `uatpc` — command-line pipeline for user-aware WLAN transmit-power
//! control: synthetic scenario generation, measurement ingestion, path-loss
//! map completion, reference-point selection, power-level search, baseline
//! comparison, and the three standard studies.

mod commands;
mod comparison;
mod errors;
mod manifest;
mod runconfig;
mod seeds;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "uatpc",
    version,
    about = "User-aware WLAN transmit-power control toolkit",
    propagate_version = true
)]
struct Cli {
    /// Global seed; every stage derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory for all artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// JSON run-configuration file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario: topology, measurements, ground truth.
    Synth(commands::synth::SynthArgs),
    /// Parse and validate measurement records, reporting every reject.
    Ingest(commands::ingest::IngestArgs),
    /// Train, apply, or evaluate the path-loss map completion models.
    Impute(commands::impute::ImputeArgs),
    /// Select a reference-point subset (uniform or stratified).
    Select(commands::select::SelectArgs),
    /// Search per-AP power levels by randomized local search.
    Optimize(commands::optimize::OptimizeArgs),
    /// Emit a baseline power configuration (full power or neighbor-threshold).
    Baseline(commands::baseline::BaselineArgs),
    /// Evaluate one or more power configurations on a reference-point set.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Run one of the standard studies (gap, imputation, selection).
    #[command(subcommand)]
    Study(commands::study::StudyCommand),
    /// Run the full pipeline end to end and write an artifact manifest.
    Pipeline(commands::pipeline::PipelineArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Synth(ref args) => commands::synth::run(&cli, args),
        Command::Ingest(ref args) => commands::ingest::run(&cli, args),
        Command::Impute(ref args) => commands::impute::run(&cli, args),
        Command::Select(ref args) => commands::select::run(&cli, args),
        Command::Optimize(ref args) => commands::optimize::run(&cli, args),
        Command::Baseline(ref args) => commands::baseline::run(&cli, args),
        Command::Evaluate(ref args) => commands::evaluate::run(&cli, args),
        Command::Study(ref args) => commands::study::run(&cli, args),
        Command::Pipeline(ref args) => commands::pipeline::run(&cli, args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
