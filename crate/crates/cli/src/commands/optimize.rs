//! `optimize` — hill-climbing power search over a reference-point set.

use std::path::PathBuf;

use clap::Args;
use uatpc::optimizer::local_search_restarts;
use uatpc::sim::network_utility;

use crate::commands::{ensure_out, load_instance, load_rps};
use crate::errors::{stage_err, CliError};
use crate::runconfig::{time_cap_option, trials_option, RunConfig};
use crate::seeds::stage_seed;
use crate::Cli;

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Network topology JSON.
    #[arg(long)]
    pub topology: PathBuf,
    /// Reference-point path-loss matrix CSV.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Candidate levels tried per AP and pass; 0 = try every allowed level
    /// [default: 15, or the config file's value].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Wall-clock cap in seconds; 0 or less = run to a local optimum
    /// [default: 600, or the config file's value].
    #[arg(long)]
    pub time_cap: Option<f64>,
    /// Independent seeded runs; best final utility wins [default: 1].
    #[arg(long)]
    pub restarts: Option<usize>,
}

pub fn run(cli: &Cli, args: &OptimizeArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let instance = load_instance(&args.topology)?;
    let rps = load_rps(&args.matrix, &instance)?;

    let trials = trials_option(args.trials.unwrap_or(cfg.optimize.trials_per_ap));
    let cap = time_cap_option(args.time_cap.unwrap_or(cfg.optimize.time_cap_s));
    let restarts = args.restarts.unwrap_or(cfg.optimize.restarts).max(1);
    let params = cfg.utility.params();
    let seed = stage_seed(cli.seed, "optimize");

    let report = local_search_restarts(&instance, &rps, trials, cap, seed, &params, restarts)
        .map_err(|e| CliError::stage("optimize", e))?;
    log::info!(
        "local search: utility {:.6} after {} passes / {} evaluations ({:?})",
        report.best_utility,
        report.iterations,
        report.evaluations,
        report.terminated_by
    );

    uatpc::io::write_json(&cli.out.join("search_report.json"), &report)
        .map_err(stage_err("optimize"))?;
    uatpc::io::save_config(&cli.out.join("config_ls.json"), &report.best_config, &instance)
        .map_err(stage_err("optimize"))?;
    let breakdown = network_utility(&rps, &report.best_config, &instance, &params);
    uatpc::io::write_breakdown_csv(&cli.out.join("breakdown_ls.csv"), &breakdown, &instance)
        .map_err(stage_err("optimize"))?;
    Ok(())
}
