//! `study` — batch experiments: search-quality gaps against the exhaustive
//! oracle, utility loss from optimizing on badly completed maps, and
//! stratified-vs-uniform selection behavior over a radius sweep.

use std::path::Path;

use clap::{Args, Subcommand};
use serde::Serialize;
use uatpc::imputation::{utility_degradation_study, DegradationConfig, FillStrategy};
use uatpc::optimizer::{
    exhaustive_search, local_search, optimality_gap, DEFAULT_ORACLE_CAP,
};
use uatpc::selection::{
    distance_quantile, isolated_fraction, neighbor_counts, pca_project, stratified_select,
    tsne_project, uniform_select, Embedding,
};
use uatpc::stats::quantile;
use uatpc::synth::{gen_hotspot_scenario, gen_uniform_scenario, HotspotParams, PlParams};
use uatpc::UtilityParams;

use crate::commands::ensure_out;
use crate::errors::{input_err, CliError};
use crate::runconfig::{time_cap_option, trials_option, DEFAULT_LEVELS};
use crate::seeds::stage_seed;
use crate::Cli;

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Subcommand)]
pub enum StudyCommand {
    /// Hill-climb quality against the exhaustive oracle on small instances.
    Gap(GapArgs),
    /// Utility lost by optimizing on obfuscated-then-filled maps.
    Imputation(ImputationArgs),
    /// Stratified vs uniform selection across an embedding-radius sweep.
    Selection(SelectionArgs),
}

pub fn run(cli: &Cli, cmd: &StudyCommand) -> Result<(), CliError> {
    match cmd {
        StudyCommand::Gap(args) => gap(cli, args),
        StudyCommand::Imputation(args) => imputation(cli, args),
        StudyCommand::Selection(args) => selection(cli, args),
    }
}

fn csv_stage<'a>(stage: &'static str, path: &'a Path) -> impl Fn(csv::Error) -> CliError + 'a {
    move |e| CliError::stage(stage, format!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------- gap study

#[derive(Debug, Args)]
pub struct GapArgs {
    /// Independent random instances.
    #[arg(long, default_value_t = 32)]
    pub instances: usize,
    #[arg(long, default_value_t = 8)]
    pub n_aps: usize,
    /// Evenly spaced dBm levels over 4..=32 per AP.
    #[arg(long, default_value_t = 4)]
    pub n_levels: usize,
    /// Explicit level set, dBm (comma-separated); overrides --n-levels.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<i32>,
    /// Reference points per instance.
    #[arg(long, default_value_t = 30)]
    pub n_rps: usize,
    /// Floor side length, meters.
    #[arg(long, default_value_t = 100.0)]
    pub side: f64,
}

/// `n` integer levels evenly spread over 4..=32 dBm.
fn spaced_levels(n: usize) -> Vec<i32> {
    let (lo, hi) = (4.0_f64, 32.0_f64);
    if n <= 1 {
        return vec![hi as i32];
    }
    let mut levels: Vec<i32> = (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).round() as i32)
        .collect();
    levels.dedup();
    levels
}

#[derive(Serialize)]
struct GapRow<'a> {
    instance: usize,
    seed: u64,
    variant: &'a str,
    utility: f64,
    exhaustive_utility: f64,
    gap_pct: f64,
    evaluations: u64,
    iterations: u64,
}

#[derive(Serialize)]
struct GapSummaryRow<'a> {
    variant: &'a str,
    instances: usize,
    median_gap_pct: f64,
    q1_gap_pct: f64,
    q3_gap_pct: f64,
    max_gap_pct: f64,
}

fn gap(cli: &Cli, args: &GapArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    if args.instances == 0 || args.n_aps == 0 || args.n_rps == 0 {
        return Err(input_err("need at least one instance, AP, and reference point"));
    }
    let levels = if args.levels.is_empty() {
        spaced_levels(args.n_levels)
    } else {
        args.levels.clone()
    };
    if levels.is_empty() {
        return Err(input_err("empty level set"));
    }
    let space = (levels.len() as f64).powi(args.n_aps as i32);
    if space > DEFAULT_ORACLE_CAP as f64 {
        return Err(input_err(format!(
            "{} levels ^ {} APs = {space:.3e} configurations exceeds the exhaustive cap {}",
            levels.len(),
            args.n_aps,
            DEFAULT_ORACLE_CAP
        )));
    }

    let stage = stage_seed(cli.seed, "study-gap");
    let params = UtilityParams::default();
    let variants: [(&str, Option<usize>); 2] = [("ls-nl", None), ("ls-l2", Some(2))];

    let rows_path = cli.out.join("gap_instances.csv");
    let mut w = csv::Writer::from_path(&rows_path).map_err(csv_stage("study-gap", &rows_path))?;
    let mut gaps: Vec<Vec<f64>> = vec![Vec::new(); variants.len()];
    for inst in 0..args.instances {
        let inst_seed = stage.wrapping_add((inst as u64).wrapping_mul(SEED_STRIDE));
        let scenario = gen_uniform_scenario(
            args.n_aps,
            args.n_rps,
            args.side,
            &levels,
            None,
            &PlParams::default(),
            inst_seed,
        );
        let (_, u_star) = exhaustive_search(&scenario.instance, &scenario.ground_truth, &params, None)
            .map_err(|e| CliError::stage("study-gap", e))?;
        for (v, (name, trials)) in variants.iter().enumerate() {
            let report = local_search(
                &scenario.instance,
                &scenario.ground_truth,
                *trials,
                None,
                inst_seed ^ 0xA5A5,
                &params,
            )
            .map_err(|e| CliError::stage("study-gap", e))?;
            let gap_pct = optimality_gap(report.best_utility, u_star);
            gaps[v].push(gap_pct);
            w.serialize(GapRow {
                instance: inst,
                seed: inst_seed,
                variant: name,
                utility: report.best_utility,
                exhaustive_utility: u_star,
                gap_pct,
                evaluations: report.evaluations,
                iterations: report.iterations,
            })
            .map_err(csv_stage("study-gap", &rows_path))?;
        }
    }
    w.flush().map_err(|e| CliError::stage("study-gap", e))?;

    let summary_path = cli.out.join("gap_summary.csv");
    let mut w =
        csv::Writer::from_path(&summary_path).map_err(csv_stage("study-gap", &summary_path))?;
    for (v, (name, _)) in variants.iter().enumerate() {
        let row = GapSummaryRow {
            variant: name,
            instances: gaps[v].len(),
            median_gap_pct: quantile(&gaps[v], 0.5).unwrap_or(0.0),
            q1_gap_pct: quantile(&gaps[v], 0.25).unwrap_or(0.0),
            q3_gap_pct: quantile(&gaps[v], 0.75).unwrap_or(0.0),
            max_gap_pct: gaps[v].iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        log::info!(
            "{}: median gap {:.3}%, p75 {:.3}%, max {:.3}% over {} instances",
            row.variant,
            row.median_gap_pct,
            row.q3_gap_pct,
            row.max_gap_pct,
            row.instances
        );
        w.serialize(row).map_err(csv_stage("study-gap", &summary_path))?;
    }
    w.flush().map_err(|e| CliError::stage("study-gap", e))?;
    Ok(())
}

// -------------------------------------------------------- imputation study

#[derive(Debug, Args)]
pub struct ImputationArgs {
    #[arg(long, default_value_t = 32)]
    pub topologies: usize,
    #[arg(long, default_value_t = 33)]
    pub n_aps: usize,
    #[arg(long, default_value_t = 330)]
    pub n_rps: usize,
    /// Floor side length, meters.
    #[arg(long, default_value_t = 100.0)]
    pub side: f64,
    /// Allowed transmit levels, dBm (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LEVELS)]
    pub levels: Vec<i32>,
    /// Visible-AP counts to sweep (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 6, 12, 24])]
    pub visible: Vec<usize>,
    /// Candidate levels per AP and pass in the searches; 0 = all.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Wall-clock cap per search run, seconds; 0 or less = none.
    #[arg(long, default_value_t = 120.0)]
    pub time_cap: f64,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Target error of the noisy-oracle fill, dB.
    #[arg(long, default_value_t = 5.0)]
    pub oracle_mae: f64,
    /// Constant used by the beyond-range fill, dB.
    #[arg(long, default_value_t = 100.0)]
    pub high_fill: f64,
}

#[derive(Serialize)]
struct LossRow<'a> {
    topology: usize,
    visible: usize,
    strategy: &'a str,
    loss_pct: f64,
}

#[derive(Serialize)]
struct CellRow<'a> {
    visible: usize,
    strategy: &'a str,
    topologies: usize,
    median_loss_pct: f64,
    q1_loss_pct: f64,
    q3_loss_pct: f64,
}

fn imputation(cli: &Cli, args: &ImputationArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    if args.topologies == 0 || args.n_aps == 0 || args.n_rps == 0 {
        return Err(input_err("need at least one topology, AP, and reference point"));
    }
    if args.visible.is_empty() || args.levels.is_empty() {
        return Err(input_err("--visible and --levels must be non-empty"));
    }
    if let Some(&v) = args.visible.iter().find(|&&v| v == 0 || v > args.n_aps) {
        return Err(input_err(format!("visible count {v} outside 1..={}", args.n_aps)));
    }

    let cfg = DegradationConfig {
        n_topologies: args.topologies,
        n_aps: args.n_aps,
        n_rps: args.n_rps,
        side_m: args.side,
        levels: args.levels.clone(),
        visible_counts: args.visible.clone(),
        strategies: vec![
            FillStrategy::High { fill_db: args.high_fill },
            FillStrategy::Median,
            FillStrategy::NoisyOracle { mae_db: args.oracle_mae },
        ],
        trials_per_ap: trials_option(args.trials),
        time_cap_s: time_cap_option(args.time_cap),
        restarts: args.restarts.max(1),
        seed: stage_seed(cli.seed, "study-imputation"),
    };
    let cells = utility_degradation_study(&cfg);

    let losses_path = cli.out.join("degradation_losses.csv");
    let mut w = csv::Writer::from_path(&losses_path)
        .map_err(csv_stage("study-imputation", &losses_path))?;
    for cell in &cells {
        for (topo, &loss) in cell.losses_pct.iter().enumerate() {
            w.serialize(LossRow {
                topology: topo,
                visible: cell.visible,
                strategy: &cell.strategy,
                loss_pct: loss,
            })
            .map_err(csv_stage("study-imputation", &losses_path))?;
        }
    }
    w.flush().map_err(|e| CliError::stage("study-imputation", e))?;

    let summary_path = cli.out.join("degradation_summary.csv");
    let mut w = csv::Writer::from_path(&summary_path)
        .map_err(csv_stage("study-imputation", &summary_path))?;
    for cell in &cells {
        log::info!(
            "visible {} / {}: median loss {:.2}% (IQR {:.2}–{:.2}%)",
            cell.visible,
            cell.strategy,
            cell.median_loss_pct,
            cell.q1_loss_pct,
            cell.q3_loss_pct
        );
        w.serialize(CellRow {
            visible: cell.visible,
            strategy: &cell.strategy,
            topologies: cell.losses_pct.len(),
            median_loss_pct: cell.median_loss_pct,
            q1_loss_pct: cell.q1_loss_pct,
            q3_loss_pct: cell.q3_loss_pct,
        })
        .map_err(csv_stage("study-imputation", &summary_path))?;
    }
    w.flush().map_err(|e| CliError::stage("study-imputation", e))?;
    Ok(())
}

// --------------------------------------------------------- selection study

#[derive(Debug, Args)]
pub struct SelectionArgs {
    #[arg(long, default_value_t = 33)]
    pub n_aps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n_stas: usize,
    #[arg(long, default_value_t = 50)]
    pub hotspots: usize,
    /// Share of stations drawn around hotspot centers.
    #[arg(long, default_value_t = 0.9)]
    pub clustered_frac: f64,
    /// Hotspot spread, meters.
    #[arg(long, default_value_t = 2.0)]
    pub cluster_sigma: f64,
    /// Floor side length, meters.
    #[arg(long, default_value_t = 100.0)]
    pub side: f64,
    /// Embedding: "pca" or "tsne".
    #[arg(long, default_value = "pca")]
    pub proj: String,
    /// Pairwise-distance quantiles defining the radius sweep.
    #[arg(long = "radius-q", value_delimiter = ',', default_values_t = [0.02, 0.05, 0.1, 0.2])]
    pub radius_q: Vec<f64>,
    /// Perplexity when --proj tsne.
    #[arg(long, default_value_t = 40.0)]
    pub perplexity: f64,
    /// Gradient steps when --proj tsne.
    #[arg(long, default_value_t = 2500)]
    pub iters: usize,
}

#[derive(Serialize)]
struct SelectionRow {
    radius_quantile: f64,
    radius: f64,
    n_points: usize,
    k_selected: usize,
    stratified_isolated_frac: f64,
    uniform_isolated_frac: f64,
    stratified_hotspot_share: f64,
    uniform_hotspot_share: f64,
}

fn hotspot_share(clustered: &[bool], selected: &[usize]) -> f64 {
    if selected.is_empty() {
        return 0.0;
    }
    selected.iter().filter(|&&i| clustered[i]).count() as f64 / selected.len() as f64
}

fn selection(cli: &Cli, args: &SelectionArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    if args.n_aps == 0 || args.n_stas == 0 {
        return Err(input_err("need at least one AP and one station"));
    }
    if args.radius_q.is_empty() {
        return Err(input_err("--radius-q must name at least one quantile"));
    }
    if let Some(&q) = args.radius_q.iter().find(|&&q| !(0.0..=1.0).contains(&q)) {
        return Err(input_err(format!("radius quantile {q} outside [0, 1]")));
    }

    let stage = stage_seed(cli.seed, "study-selection");
    let scenario = gen_hotspot_scenario(
        args.n_aps,
        args.n_stas,
        args.side,
        &DEFAULT_LEVELS,
        None,
        &PlParams::default(),
        &HotspotParams {
            n_hotspots: args.hotspots,
            clustered_fraction: args.clustered_frac,
            cluster_sigma_m: args.cluster_sigma,
        },
        stage,
    );
    let matrix = scenario.ground_truth.matrix();
    let embedding: Embedding = match args.proj.as_str() {
        "pca" => pca_project(matrix, 3).map_err(|e| CliError::stage("study-selection", e))?,
        "tsne" => tsne_project(matrix, args.perplexity, args.iters, stage)
            .map_err(|e| CliError::stage("study-selection", e))?
            .embedding,
        other => return Err(input_err(format!("unknown projection `{other}`"))),
    };

    let rows_path = cli.out.join("selection_study.csv");
    let mut w =
        csv::Writer::from_path(&rows_path).map_err(csv_stage("study-selection", &rows_path))?;
    for (i, &q) in args.radius_q.iter().enumerate() {
        let sweep_seed = stage.wrapping_add((i as u64 + 1).wrapping_mul(SEED_STRIDE));
        let radius = distance_quantile(&embedding, q, stage)
            .map_err(|e| CliError::stage("study-selection", e))?;
        let counts = neighbor_counts(&embedding, radius)
            .map_err(|e| CliError::stage("study-selection", e))?;
        let strat = stratified_select(&embedding, radius, sweep_seed)
            .map_err(|e| CliError::stage("study-selection", e))?;
        let unif = uniform_select(embedding.len(), strat.selected.len(), sweep_seed)
            .map_err(|e| CliError::stage("study-selection", e))?;
        let row = SelectionRow {
            radius_quantile: q,
            radius,
            n_points: embedding.len(),
            k_selected: strat.selected.len(),
            stratified_isolated_frac: isolated_fraction(&counts, &strat.selected),
            uniform_isolated_frac: isolated_fraction(&counts, &unif.selected),
            stratified_hotspot_share: hotspot_share(&scenario.sta_clustered, &strat.selected),
            uniform_hotspot_share: hotspot_share(&scenario.sta_clustered, &unif.selected),
        };
        log::info!(
            "q {:.3} (r {:.3}): kept {}, isolated {:.3} vs uniform {:.3}",
            q,
            radius,
            row.k_selected,
            row.stratified_isolated_frac,
            row.uniform_isolated_frac
        );
        w.serialize(row).map_err(csv_stage("study-selection", &rows_path))?;
    }
    w.flush().map_err(|e| CliError::stage("study-selection", e))?;
    Ok(())
}
