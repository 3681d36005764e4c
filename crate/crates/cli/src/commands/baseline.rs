//! `baseline` — non-searching power policies for comparison.

use std::path::PathBuf;

use clap::Args;
use uatpc::optimizer::{full_power, tpcv1_offline};
use uatpc::sim::network_utility;

use crate::commands::{ensure_out, load_instance, load_rps};
use crate::errors::{input_err, stage_err, CliError};
use crate::runconfig::RunConfig;
use crate::Cli;

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Network topology JSON.
    #[arg(long)]
    pub topology: PathBuf,
    /// Policy: "fullpower" (every AP at its maximum) or "tpcv1"
    /// (neighbor-threshold power assignment).
    #[arg(long)]
    pub which: String,
    /// Target third-neighbor signal for tpcv1, dBm
    /// [default: -70, or the config file's value].
    #[arg(long)]
    pub tpc_threshold: Option<f64>,
    /// Reference-point matrix CSV; when given, also writes the per-point
    /// utility breakdown.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

pub fn run(cli: &Cli, args: &BaselineArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let instance = load_instance(&args.topology)?;

    let config = match args.which.as_str() {
        "fullpower" => full_power(&instance),
        "tpcv1" => {
            let threshold = args.tpc_threshold.unwrap_or(cfg.tpc_threshold_dbm);
            tpcv1_offline(&instance, threshold)
        }
        other => return Err(input_err(format!("unknown baseline `{other}`"))),
    };

    let config_path = cli.out.join(format!("config_{}.json", args.which));
    uatpc::io::save_config(&config_path, &config, &instance).map_err(stage_err("baseline"))?;
    log::info!("wrote {} levels to {}", args.which, config_path.display());

    if let Some(matrix) = &args.matrix {
        let rps = load_rps(matrix, &instance)?;
        let breakdown = network_utility(&rps, &config, &instance, &cfg.utility.params());
        let breakdown_path = cli.out.join(format!("breakdown_{}.csv", args.which));
        uatpc::io::write_breakdown_csv(&breakdown_path, &breakdown, &instance)
            .map_err(stage_err("baseline"))?;
        log::info!("{} network utility: {:.6}", args.which, breakdown.total);
    }
    Ok(())
}
