//! `uatpc synth` — generate a synthetic scenario: topology JSON, obfuscated
//! measurement JSONL, and the full ground-truth path-loss matrix (clearly
//! marked as ground truth; evaluation-only).

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::Serialize;

use uatpc::synth::{
    gen_hotspot_scenario, gen_uniform_scenario, obfuscate, HotspotParams, PlParams,
    SyntheticScenario,
};

use crate::commands::ensure_out;
use crate::errors::{input_err, CliError};
use crate::seeds::stage_seed;
use crate::Cli;

#[derive(Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub placement: Placement,
}

#[derive(Subcommand)]
pub enum Placement {
    /// Stations placed uniformly over the floor.
    Uniform(CommonArgs),
    /// Stations concentrated around hotspot centers.
    Hotspot(HotspotArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// Number of access points.
    #[arg(long, default_value_t = 10)]
    pub n_aps: usize,

    /// Number of stations (one measurement record each).
    #[arg(long, default_value_t = 400)]
    pub n_stas: usize,

    /// Floor side length, meters.
    #[arg(long, default_value_t = 100.0)]
    pub side: f64,

    /// Allowed transmit levels, dBm (comma-separated, shared by all APs).
    #[arg(long, value_delimiter = ',', default_values_t = crate::runconfig::DEFAULT_LEVELS)]
    pub levels: Vec<i32>,

    /// Channels cycled over APs; omit for a single-channel network.
    #[arg(long, value_delimiter = ',')]
    pub channels: Vec<u32>,

    /// Reference path loss at the reference distance, dB.
    #[arg(long, default_value_t = 40.0)]
    pub pl0: f64,

    /// Reference distance, meters.
    #[arg(long, default_value_t = 1.0)]
    pub ref_dist: f64,

    /// Path-loss exponent.
    #[arg(long, default_value_t = 3.0)]
    pub exponent: f64,

    /// Log-normal shadowing standard deviation, dB (0 = deterministic).
    #[arg(long, default_value_t = 0.0)]
    pub shadowing: f64,

    /// Visible APs per measurement record (nearest-k); 0 keeps all.
    #[arg(long, default_value_t = 6)]
    pub visible: usize,
}

#[derive(Args)]
pub struct HotspotArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Number of hotspot centers.
    #[arg(long, default_value_t = 50)]
    pub hotspots: usize,

    /// Fraction of stations drawn around hotspot centers.
    #[arg(long, default_value_t = 0.9)]
    pub clustered_frac: f64,

    /// Per-axis spread of a hotspot cluster, meters.
    #[arg(long, default_value_t = 2.0)]
    pub cluster_sigma: f64,
}

/// Everything about the generated scenario that is not in the topology or
/// measurement files: positions, hotspot membership, generator parameters.
#[derive(Serialize)]
struct ScenarioMeta<'a> {
    seed: u64,
    side_m: f64,
    pl0_db: f64,
    ref_dist_m: f64,
    exponent: f64,
    shadowing_sigma_db: f64,
    visible: usize,
    ap_positions: &'a [[f64; 2]],
    sta_positions: &'a [[f64; 2]],
    hotspot_centers: &'a [[f64; 2]],
    sta_clustered: &'a [bool],
}

pub fn run(cli: &Cli, args: &SynthArgs) -> Result<(), CliError> {
    let common = match &args.placement {
        Placement::Uniform(c) => c,
        Placement::Hotspot(h) => &h.common,
    };
    validate(common)?;
    ensure_out(&cli.out)?;
    let seed = stage_seed(cli.seed, "synth");
    let pl_params = PlParams {
        pl0_db: common.pl0,
        ref_dist_m: common.ref_dist,
        exponent: common.exponent,
        shadowing_sigma_db: common.shadowing,
    };
    let channels = (!common.channels.is_empty()).then_some(common.channels.as_slice());
    let scenario = match &args.placement {
        Placement::Uniform(_) => gen_uniform_scenario(
            common.n_aps,
            common.n_stas,
            common.side,
            &common.levels,
            channels,
            &pl_params,
            seed,
        ),
        Placement::Hotspot(h) => gen_hotspot_scenario(
            common.n_aps,
            common.n_stas,
            common.side,
            &common.levels,
            channels,
            &pl_params,
            &HotspotParams {
                n_hotspots: h.hotspots,
                clustered_fraction: h.clustered_frac,
                cluster_sigma_m: h.cluster_sigma,
            },
            seed,
        ),
    };
    write_scenario(&cli.out, &scenario, common.visible, seed)?;
    Ok(())
}

fn validate(common: &CommonArgs) -> Result<(), CliError> {
    if common.n_aps == 0 || common.n_stas == 0 {
        return Err(input_err("need at least one AP and one station"));
    }
    if common.levels.is_empty() {
        return Err(input_err("--levels must name at least one dBm level"));
    }
    if common.visible > common.n_aps {
        return Err(input_err(format!(
            "--visible {} exceeds the AP count {}",
            common.visible, common.n_aps
        )));
    }
    Ok(())
}

/// Writes the four artifacts; shared with the pipeline stage.
pub fn write_scenario(
    out: &Path,
    scenario: &SyntheticScenario,
    visible: usize,
    seed: u64,
) -> Result<(Vec<PathBuf>, Vec<uatpc::MeasurementRecord>), CliError> {
    let k = if visible == 0 {
        scenario.instance.n_aps()
    } else {
        visible
    };
    let records = obfuscate(&scenario.ground_truth, &scenario.instance, k);

    let topology = out.join("topology.json");
    uatpc::io::save_topology(&topology, &scenario.instance)
        .map_err(|e| CliError::stage("synth", e))?;
    let measurements = out.join("measurements.jsonl");
    uatpc::io::write_measurements_jsonl(&measurements, &records)
        .map_err(|e| CliError::stage("synth", e))?;
    let groundtruth = out.join("groundtruth_pl.csv");
    uatpc::io::write_matrix_csv(
        &groundtruth,
        scenario.ground_truth.matrix(),
        scenario.ground_truth.origin_ids(),
        &scenario.instance.ap_ids(),
    )
    .map_err(|e| CliError::stage("synth", e))?;
    let meta = out.join("scenario_meta.json");
    uatpc::io::write_json(
        &meta,
        &ScenarioMeta {
            seed,
            side_m: scenario.side_m,
            pl0_db: scenario.pl_params.pl0_db,
            ref_dist_m: scenario.pl_params.ref_dist_m,
            exponent: scenario.pl_params.exponent,
            shadowing_sigma_db: scenario.pl_params.shadowing_sigma_db,
            visible: k,
            ap_positions: &scenario.ap_positions,
            sta_positions: &scenario.sta_positions,
            hotspot_centers: &scenario.hotspot_centers,
            sta_clustered: &scenario.sta_clustered,
        },
    )
    .map_err(|e| CliError::stage("synth", e))?;

    log::info!(
        "generated {} APs / {} stations; {} visible APs per record",
        scenario.instance.n_aps(),
        records.len(),
        k
    );
    Ok((vec![topology, measurements, groundtruth, meta], records))
}
