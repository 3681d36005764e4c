//! `pipeline` — the full chain in one run: scenario (or supplied inputs) →
//! ingestion → map completion → reference-point selection → power search →
//! baselines → comparison, with every artifact hashed into a manifest.

use std::path::{Path, PathBuf};

use clap::Args;
use uatpc::imputation::ImputationModel;
use uatpc::optimizer::{full_power, local_search_restarts, tpcv1_offline};
use uatpc::sim::network_utility;
use uatpc::synth::{
    gen_hotspot_scenario, gen_uniform_scenario, HotspotParams, PlParams, SyntheticScenario,
};
use uatpc::{DenseMatrix, PowerConfig, ReferencePointSet};

use crate::commands::impute::{complete_records, train_summaries};
use crate::commands::select::{select, write_outputs};
use crate::commands::synth::write_scenario;
use crate::commands::{ensure_out, load_instance};
use crate::comparison::{compare_configs, render_comparison, write_comparison_csv};
use crate::errors::{input_err, stage_err, CliError};
use crate::manifest::Manifest;
use crate::runconfig::{time_cap_option, trials_option, RunConfig, ScenarioConfig};
use crate::seeds::stage_seed;
use crate::Cli;

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Existing measurement file (JSONL or CSV); with --topology, skips
    /// scenario synthesis.
    #[arg(long, requires = "topology")]
    pub measurements: Option<PathBuf>,
    /// Existing topology JSON; requires --measurements.
    #[arg(long, requires = "measurements")]
    pub topology: Option<PathBuf>,
    /// Station placement override: "uniform" or "hotspot".
    #[arg(long)]
    pub placement: Option<String>,
    #[arg(long)]
    pub n_aps: Option<usize>,
    #[arg(long)]
    pub n_stas: Option<usize>,
    /// Visible APs per synthetic measurement (nearest-k); 0 = all.
    #[arg(long)]
    pub visible: Option<usize>,
    /// Training epoch cap override.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Selection method override: "uniform" or "stratified".
    #[arg(long)]
    pub method: Option<String>,
    /// Uniform selection size override.
    #[arg(long)]
    pub k: Option<usize>,
    /// Stratified radius override, as a pairwise-distance quantile.
    #[arg(long)]
    pub radius_q: Option<f64>,
    /// Search candidate cap override; 0 = try every allowed level.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Search wall-clock cap override, seconds; 0 or less = none.
    #[arg(long)]
    pub time_cap: Option<f64>,
    /// Search restarts override.
    #[arg(long)]
    pub restarts: Option<usize>,
}

fn apply_overrides(cfg: &mut RunConfig, args: &PipelineArgs) {
    if let Some(p) = &args.placement {
        cfg.scenario.placement = p.clone();
    }
    if let Some(n) = args.n_aps {
        cfg.scenario.n_aps = n;
    }
    if let Some(n) = args.n_stas {
        cfg.scenario.n_stas = n;
    }
    if let Some(v) = args.visible {
        cfg.scenario.visible = v;
    }
    if let Some(e) = args.epochs {
        cfg.impute.epochs = e;
    }
    if let Some(m) = &args.method {
        cfg.select.method = m.clone();
    }
    if let Some(k) = args.k {
        cfg.select.k = k;
    }
    if let Some(q) = args.radius_q {
        cfg.select.radius_quantile = q;
        cfg.select.radius = 0.0;
    }
    if let Some(t) = args.trials {
        cfg.optimize.trials_per_ap = t;
    }
    if let Some(c) = args.time_cap {
        cfg.optimize.time_cap_s = c;
    }
    if let Some(r) = args.restarts {
        cfg.optimize.restarts = r;
    }
}

fn validate(cfg: &RunConfig, synthesizing: bool) -> Result<(), CliError> {
    if synthesizing {
        let s = &cfg.scenario;
        if s.n_aps == 0 || s.n_stas == 0 {
            return Err(input_err("need at least one AP and one station"));
        }
        if s.levels_dbm.is_empty() {
            return Err(input_err("scenario level set must not be empty"));
        }
        if s.visible > s.n_aps {
            return Err(input_err(format!(
                "visible {} exceeds the AP count {}",
                s.visible, s.n_aps
            )));
        }
        if !matches!(s.placement.as_str(), "uniform" | "hotspot") {
            return Err(input_err(format!("unknown placement `{}`", s.placement)));
        }
    }
    if !matches!(cfg.select.method.as_str(), "uniform" | "stratified") {
        return Err(input_err(format!("unknown method `{}`", cfg.select.method)));
    }
    if !matches!(cfg.select.projection.as_str(), "pca" | "tsne") {
        return Err(input_err(format!("unknown projection `{}`", cfg.select.projection)));
    }
    if !matches!(cfg.impute.fallback.as_str(), "median" | "high") {
        return Err(input_err(format!("unknown fallback `{}`", cfg.impute.fallback)));
    }
    Ok(())
}

fn generate(cfg: &ScenarioConfig, seed: u64) -> SyntheticScenario {
    let pl = PlParams {
        pl0_db: cfg.pl0_db,
        ref_dist_m: cfg.ref_dist_m,
        exponent: cfg.exponent,
        shadowing_sigma_db: cfg.shadowing_sigma_db,
    };
    let channels = (!cfg.channels.is_empty()).then_some(cfg.channels.as_slice());
    match cfg.placement.as_str() {
        "uniform" => gen_uniform_scenario(
            cfg.n_aps,
            cfg.n_stas,
            cfg.side_m,
            &cfg.levels_dbm,
            channels,
            &pl,
            seed,
        ),
        _ => gen_hotspot_scenario(
            cfg.n_aps,
            cfg.n_stas,
            cfg.side_m,
            &cfg.levels_dbm,
            channels,
            &pl,
            &HotspotParams {
                n_hotspots: cfg.n_hotspots,
                clustered_fraction: cfg.clustered_fraction,
                cluster_sigma_m: cfg.cluster_sigma_m,
            },
            seed,
        ),
    }
}

/// The per-AP regressor files a saved model directory holds, sorted.
fn model_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::stage("impute-train", format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn run(cli: &Cli, args: &PipelineArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    apply_overrides(&mut cfg, args);
    let synthesizing = args.measurements.is_none();
    validate(&cfg, synthesizing)?;

    let mut manifest = Manifest::new(&cli.out, cli.seed);
    let cfg_path = cli.out.join("run_config.json");
    uatpc::io::write_json(&cfg_path, &cfg).map_err(stage_err("config"))?;
    manifest.add(&cfg_path)?;

    // Scenario: synthesize unless both inputs were supplied.
    let (topology_path, measurements_path) = match (&args.topology, &args.measurements) {
        (Some(t), Some(m)) => (t.clone(), m.clone()),
        _ => {
            let seed = stage_seed(cli.seed, "synth");
            let scenario = generate(&cfg.scenario, seed);
            let (paths, _) = write_scenario(&cli.out, &scenario, cfg.scenario.visible, seed)?;
            for p in &paths {
                manifest.add(p)?;
            }
            log::info!(
                "synthesized {} APs / {} stations ({})",
                cfg.scenario.n_aps,
                cfg.scenario.n_stas,
                cfg.scenario.placement
            );
            (cli.out.join("topology.json"), cli.out.join("measurements.jsonl"))
        }
    };

    // Ingest: validate the map reports against the topology.
    let instance = load_instance(&topology_path)?;
    let ap_ids = instance.ap_ids();
    if !measurements_path.exists() {
        return Err(input_err(format!(
            "measurement file {} does not exist",
            measurements_path.display()
        )));
    }
    let (records, report) = uatpc::io::load_measurements(&measurements_path, Some(&ap_ids))
        .map_err(input_err)?;
    log::info!(
        "ingest: {} accepted, {} rejected of {} units",
        report.accepted,
        report.rejected,
        report.units_total
    );
    if records.is_empty() {
        return Err(CliError::stage("ingest", "no valid measurement records"));
    }
    let accepted_path = cli.out.join("measurements_accepted.jsonl");
    uatpc::io::write_measurements_jsonl(&accepted_path, &records).map_err(stage_err("ingest"))?;
    manifest.add(&accepted_path)?;
    let report_path = cli.out.join("ingest_report.json");
    uatpc::io::write_json(&report_path, &report).map_err(stage_err("ingest"))?;
    manifest.add(&report_path)?;

    // Map completion: train per-AP regressors, then fill every record.
    let train_seed = stage_seed(cli.seed, "impute-train");
    let model = ImputationModel::train(
        &records,
        &ap_ids,
        cfg.impute.min_visible,
        cfg.impute.epochs,
        train_seed,
    )
    .map_err(|e| CliError::stage("impute-train", e))?;
    let model_dir = cli.out.join("model");
    model.save(&model_dir).map_err(|e| CliError::stage("impute-train", e))?;
    for p in model_files(&model_dir)? {
        manifest.add(&p)?;
    }
    let summary = train_summaries(&model, &records, cfg.impute.min_visible, train_seed)?;
    let train_report_path = cli.out.join("impute_train_report.json");
    uatpc::io::write_json(&train_report_path, &summary).map_err(stage_err("impute-train"))?;
    manifest.add(&train_report_path)?;
    log::info!(
        "trained {}/{} AP regressors",
        model.regressors.iter().flatten().count(),
        ap_ids.len()
    );

    let (rows, fallbacks) = complete_records(&records, &model, &cfg.impute.fallback)?;
    if fallbacks > 0 {
        log::warn!("{fallbacks} rows were too sparse for the model; constant-filled");
    }
    let origin_ids: Vec<String> = records.iter().map(|r| r.sta_id.clone()).collect();
    let completed_path = cli.out.join("completed_pl.csv");
    let completed = DenseMatrix::from_rows(rows);
    uatpc::io::write_matrix_csv(&completed_path, &completed, &origin_ids, &ap_ids)
        .map_err(stage_err("impute-apply"))?;
    manifest.add(&completed_path)?;
    let rps = ReferencePointSet::new(completed, origin_ids, ap_ids.len())
        .map_err(|e| CliError::stage("impute-apply", e))?;

    // Reference-point selection on the completed map.
    let select_seed = stage_seed(cli.seed, "select");
    let radius = (cfg.select.radius > 0.0).then_some(cfg.select.radius);
    let (embedding, result) = select(
        &rps,
        &cfg.select.method,
        &cfg.select.projection,
        cfg.select.k,
        radius,
        Some(cfg.select.radius_quantile),
        cfg.select.perplexity,
        cfg.select.iterations,
        select_seed,
    )?;
    for p in write_outputs(&cli.out, &rps, &ap_ids, &embedding, &result)? {
        manifest.add(&p)?;
    }
    if result.selected.is_empty() {
        return Err(CliError::stage("select", "selection kept no reference points"));
    }
    log::info!(
        "{} selection kept {} of {} reference points",
        cfg.select.method,
        result.selected.len(),
        rps.len()
    );
    let subset = rps.subset(&result.selected);

    // Power search plus the two non-searching baselines.
    let params = cfg.utility.params();
    let report = local_search_restarts(
        &instance,
        &subset,
        trials_option(cfg.optimize.trials_per_ap),
        time_cap_option(cfg.optimize.time_cap_s),
        stage_seed(cli.seed, "optimize"),
        &params,
        cfg.optimize.restarts.max(1),
    )
    .map_err(|e| CliError::stage("optimize", e))?;
    log::info!(
        "local search: utility {:.6} after {} passes / {} evaluations",
        report.best_utility,
        report.iterations,
        report.evaluations
    );
    let report_path = cli.out.join("search_report.json");
    uatpc::io::write_json(&report_path, &report).map_err(stage_err("optimize"))?;
    manifest.add(&report_path)?;

    let named: Vec<(String, PowerConfig)> = vec![
        ("ls".into(), report.best_config.clone()),
        ("fullpower".into(), full_power(&instance)),
        ("tpcv1".into(), tpcv1_offline(&instance, cfg.tpc_threshold_dbm)),
    ];
    for (name, config) in &named {
        let path = cli.out.join(format!("config_{name}.json"));
        uatpc::io::save_config(&path, config, &instance).map_err(stage_err("optimize"))?;
        manifest.add(&path)?;
    }

    // Every strategy is scored on the identical selected reference set.
    for (name, config) in &named {
        let breakdown = network_utility(&subset, config, &instance, &params);
        let path = cli.out.join(format!("breakdown_{name}.csv"));
        uatpc::io::write_breakdown_csv(&path, &breakdown, &instance)
            .map_err(stage_err("evaluate"))?;
        manifest.add(&path)?;
    }
    let table = compare_configs(&subset, &instance, &named, &params);
    let comparison_path = cli.out.join("comparison.csv");
    write_comparison_csv(&comparison_path, &table)?;
    manifest.add(&comparison_path)?;

    let manifest_path = manifest.write()?;
    print!("{}", render_comparison(&table));
    println!("manifest: {}", manifest_path.display());
    Ok(())
}
