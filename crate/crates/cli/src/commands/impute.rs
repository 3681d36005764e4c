//! `uatpc impute` — train per-AP path-loss regressors, apply them to
//! complete sparse measurements into a full matrix, or score them with the
//! hide-and-impute harness.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::Serialize;

use uatpc::imputation::{
    hide_and_impute_eval, high_imputer, median_imputer, ImputationModel, ImputeError,
    DEFAULT_HIGH_FILL_DB,
};
use uatpc::model::{MeasurementRecord, NetworkInstance};

use crate::commands::{ensure_out, load_instance};
use crate::errors::{input_err, CliError};
use crate::seeds::stage_seed;
use crate::Cli;

#[derive(Args)]
pub struct ImputeArgs {
    #[command(subcommand)]
    pub action: ImputeAction,
}

#[derive(Subcommand)]
pub enum ImputeAction {
    /// Train one regressor per AP from the measurement corpus.
    Train(TrainArgs),
    /// Complete every record into a full path-loss row.
    Apply(ApplyArgs),
    /// Hide known entries and measure reconstruction error.
    Eval(EvalArgs),
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub measurements: PathBuf,

    #[arg(long)]
    pub topology: PathBuf,

    /// Records need at least this many visible entries to contribute.
    #[arg(long, default_value_t = 4)]
    pub min_visible: usize,

    /// Maximum training epochs (early stopping may end sooner).
    #[arg(long, default_value_t = 150)]
    pub epochs: usize,

    /// Directory for the per-AP model files (default: <out>/model).
    #[arg(long)]
    pub model_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub measurements: PathBuf,

    #[arg(long)]
    pub topology: PathBuf,

    #[arg(long)]
    pub model_dir: Option<PathBuf>,

    /// Fill for rows too sparse to impute: "median" or "high".
    #[arg(long, default_value = "median")]
    pub fallback: String,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub measurements: PathBuf,

    #[arg(long)]
    pub topology: PathBuf,

    #[arg(long)]
    pub model_dir: Option<PathBuf>,

    /// Hidden-entry counts to evaluate (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8])]
    pub hide: Vec<usize>,
}

pub fn run(cli: &Cli, args: &ImputeArgs) -> Result<(), CliError> {
    match &args.action {
        ImputeAction::Train(a) => train(cli, a),
        ImputeAction::Apply(a) => apply(cli, a),
        ImputeAction::Eval(a) => eval(cli, a),
    }
}

fn model_dir(cli: &Cli, flag: &Option<PathBuf>) -> PathBuf {
    flag.clone().unwrap_or_else(|| cli.out.join("model"))
}

fn load_records(
    path: &Path,
    instance: &NetworkInstance,
) -> Result<Vec<MeasurementRecord>, CliError> {
    if !path.exists() {
        return Err(input_err(format!("measurement file {} does not exist", path.display())));
    }
    let (records, report) =
        uatpc::io::load_measurements(path, Some(&instance.ap_ids())).map_err(input_err)?;
    if report.rejected > 0 {
        log::warn!("{} records rejected during load", report.rejected);
    }
    Ok(records)
}

#[derive(Serialize)]
pub struct TrainSummary {
    ap_id: String,
    rows: usize,
    trained: bool,
    epochs_run: Option<usize>,
    train_mae_db: Option<f64>,
    val_mae_db: Option<f64>,
}

/// Per-AP training summary rows; shared with the pipeline stage.
pub fn train_summaries(
    model: &ImputationModel,
    records: &[MeasurementRecord],
    min_visible: usize,
    seed: u64,
) -> Result<Vec<TrainSummary>, CliError> {
    let (datasets, _) =
        uatpc::imputation::build_datasets(records, &model.ap_ids, min_visible, seed)
            .map_err(|e| CliError::stage("impute-train", e))?;
    Ok(model
        .ap_ids
        .iter()
        .enumerate()
        .map(|(i, id)| TrainSummary {
            ap_id: id.clone(),
            rows: datasets[i].len(),
            trained: model.regressors[i].is_some(),
            epochs_run: model.reports[i].as_ref().map(|r| r.epochs_run),
            train_mae_db: model.reports[i].as_ref().map(|r| r.train_mae_db),
            val_mae_db: model.reports[i].as_ref().map(|r| r.val_mae_db),
        })
        .collect())
}

fn train(cli: &Cli, args: &TrainArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    let instance = load_instance(&args.topology)?;
    let records = load_records(&args.measurements, &instance)?;
    let ap_ids = instance.ap_ids();
    let seed = stage_seed(cli.seed, "impute-train");
    let model = ImputationModel::train(&records, &ap_ids, args.min_visible, args.epochs, seed)
        .map_err(|e| CliError::stage("impute-train", e))?;

    let dir = model_dir(cli, &args.model_dir);
    model.save(&dir).map_err(|e| CliError::stage("impute-train", e))?;

    let summary = train_summaries(&model, &records, args.min_visible, seed)?;
    let report_path = cli.out.join("impute_train_report.json");
    uatpc::io::write_json(&report_path, &summary)
        .map_err(|e| CliError::stage("impute-train", e))?;
    log::info!(
        "trained {}/{} AP regressors into {}",
        model.regressors.iter().flatten().count(),
        ap_ids.len(),
        dir.display()
    );
    Ok(())
}

/// Completes every record; sparse rows fall back to a constant impute.
/// Shared with the pipeline stage.
pub fn complete_records(
    records: &[MeasurementRecord],
    model: &ImputationModel,
    fallback: &str,
) -> Result<(Vec<Vec<f64>>, usize), CliError> {
    let constant = match fallback {
        "high" => high_imputer(DEFAULT_HIGH_FILL_DB),
        "median" => median_imputer(records).map_err(|e| CliError::stage("impute-apply", e))?,
        other => {
            return Err(input_err(format!(
                "unknown fallback `{other}` (expected median or high)"
            )))
        }
    };
    let mut rows = Vec::with_capacity(records.len());
    let mut fallbacks = 0usize;
    for record in records {
        let partial = record.partial_row(&model.ap_ids);
        match model.impute(&partial) {
            Ok(full) => rows.push(full),
            Err(ImputeError::NotImputable(_)) => {
                fallbacks += 1;
                rows.push(constant.complete(&partial));
            }
            Err(e) => return Err(CliError::stage("impute-apply", e)),
        }
    }
    Ok((rows, fallbacks))
}

fn apply(cli: &Cli, args: &ApplyArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    let instance = load_instance(&args.topology)?;
    let records = load_records(&args.measurements, &instance)?;
    let ap_ids = instance.ap_ids();
    let model = ImputationModel::load(&model_dir(cli, &args.model_dir), Some(&ap_ids))
        .map_err(input_err)?;
    let (rows, fallbacks) = complete_records(&records, &model, &args.fallback)?;
    if fallbacks > 0 {
        log::warn!("{fallbacks} rows were too sparse for the model; constant-filled");
    }
    let out_path = cli.out.join("completed_pl.csv");
    uatpc::io::write_matrix_csv(
        &out_path,
        &uatpc::DenseMatrix::from_rows(rows),
        &records.iter().map(|r| r.sta_id.clone()).collect::<Vec<_>>(),
        &ap_ids,
    )
    .map_err(|e| CliError::stage("impute-apply", e))?;
    log::info!("wrote {} completed rows to {}", records.len(), out_path.display());
    Ok(())
}

#[derive(Serialize)]
struct EvalRow {
    n_hidden: usize,
    n_records: usize,
    n_errors: usize,
    mean_db: f64,
    median_db: f64,
    q1_db: f64,
    q3_db: f64,
}

fn eval(cli: &Cli, args: &EvalArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    let instance = load_instance(&args.topology)?;
    let records = load_records(&args.measurements, &instance)?;
    let model = ImputationModel::load(&model_dir(cli, &args.model_dir), Some(&instance.ap_ids()))
        .map_err(input_err)?;
    let seed = stage_seed(cli.seed, "impute-eval");
    let mut rows = Vec::new();
    for &n_hidden in &args.hide {
        let summary = hide_and_impute_eval(&records, &model, n_hidden, seed ^ n_hidden as u64)
            .map_err(|e| CliError::stage("impute-eval", e))?;
        log::info!(
            "hide {n_hidden}: median {:.2} dB (q1 {:.2}, q3 {:.2}) over {} errors",
            summary.median_db,
            summary.q1_db,
            summary.q3_db,
            summary.errors_db.len()
        );
        rows.push(EvalRow {
            n_hidden,
            n_records: summary.n_records,
            n_errors: summary.errors_db.len(),
            mean_db: summary.mean_db,
            median_db: summary.median_db,
            q1_db: summary.q1_db,
            q3_db: summary.q3_db,
        });
    }
    let path = cli.out.join("impute_eval.json");
    uatpc::io::write_json(&path, &rows).map_err(|e| CliError::stage("impute-eval", e))?;
    Ok(())
}
