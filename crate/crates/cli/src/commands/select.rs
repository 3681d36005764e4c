//! `uatpc select` — embed a complete path-loss matrix into 3-D and select a
//! reference-point subset, either uniformly (density-preserving) or by
//! radius pruning (coverage-friendly).

use std::path::{Path, PathBuf};

use clap::Args;

use uatpc::model::ReferencePointSet;
use uatpc::selection::{
    distance_quantile, pca_project, stratified_select, tsne_project, uniform_select, Embedding,
    SelectionResult,
};

use crate::commands::{ensure_out, load_instance, load_rps};
use crate::errors::{input_err, CliError};
use crate::seeds::stage_seed;
use crate::Cli;

#[derive(Args)]
pub struct SelectArgs {
    /// Complete path-loss matrix CSV (origin_id + one column per AP).
    #[arg(long)]
    pub matrix: PathBuf,

    /// Topology the matrix columns must match.
    #[arg(long)]
    pub topology: PathBuf,

    /// Selection method.
    #[arg(long, value_parser = ["uniform", "stratified"], default_value = "stratified")]
    pub method: String,

    /// Uniform selection size.
    #[arg(long, default_value_t = 100)]
    pub k: usize,

    /// Stratified pruning radius in embedding units.
    #[arg(long, conflicts_with = "radius_q")]
    pub radius: Option<f64>,

    /// Radius as a pairwise-distance quantile of the embedding (0..1).
    #[arg(long)]
    pub radius_q: Option<f64>,

    /// Projection method.
    #[arg(long, value_parser = ["pca", "tsne"], default_value = "pca")]
    pub proj: String,

    /// t-SNE perplexity.
    #[arg(long, default_value_t = 40.0)]
    pub perplexity: f64,

    /// t-SNE iterations.
    #[arg(long, default_value_t = 2500)]
    pub iters: usize,
}

pub fn run(cli: &Cli, args: &SelectArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    let instance = load_instance(&args.topology)?;
    let rps = load_rps(&args.matrix, &instance)?;
    let seed = stage_seed(cli.seed, "select");

    let (embedding, result) = select(
        &rps,
        &args.method,
        &args.proj,
        args.k,
        args.radius,
        args.radius_q,
        args.perplexity,
        args.iters,
        seed,
    )?;
    write_outputs(&cli.out, &rps, &instance.ap_ids(), &embedding, &result)?;
    log::info!(
        "{} selection kept {} of {} reference points",
        args.method,
        result.selected.len(),
        rps.len()
    );
    Ok(())
}

/// Projection + selection; shared with the pipeline stage.
#[allow(clippy::too_many_arguments)]
pub fn select(
    rps: &ReferencePointSet,
    method: &str,
    proj: &str,
    k: usize,
    radius: Option<f64>,
    radius_q: Option<f64>,
    perplexity: f64,
    iterations: usize,
    seed: u64,
) -> Result<(Embedding, SelectionResult), CliError> {
    let embedding = match proj {
        "pca" => pca_project(rps.matrix(), 3).map_err(|e| CliError::stage("select", e))?,
        "tsne" => tsne_project(rps.matrix(), perplexity, iterations, seed)
            .map_err(|e| CliError::stage("select", e))?
            .embedding,
        other => return Err(input_err(format!("unknown projection `{other}`"))),
    };
    let result = match method {
        "uniform" => uniform_select(rps.len(), k, seed).map_err(|e| CliError::stage("select", e))?,
        "stratified" => {
            let r = match (radius, radius_q) {
                (Some(r), _) => r,
                (None, Some(q)) => distance_quantile(&embedding, q, seed)
                    .map_err(|e| CliError::stage("select", e))?,
                (None, None) => {
                    return Err(input_err(
                        "stratified selection needs --radius or --radius-q",
                    ))
                }
            };
            stratified_select(&embedding, r, seed).map_err(|e| CliError::stage("select", e))?
        }
        other => return Err(input_err(format!("unknown method `{other}`"))),
    };
    Ok((embedding, result))
}

/// Writes embedding CSV, selection JSON, and the selected-row matrix.
pub fn write_outputs(
    out: &Path,
    rps: &ReferencePointSet,
    ap_ids: &[String],
    embedding: &Embedding,
    result: &SelectionResult,
) -> Result<Vec<PathBuf>, CliError> {
    let embedding_path = out.join("embedding.csv");
    uatpc::io::write_embedding_csv(&embedding_path, embedding)
        .map_err(|e| CliError::stage("select", e))?;
    let selection_path = out.join("selection.json");
    uatpc::io::write_json(&selection_path, result).map_err(|e| CliError::stage("select", e))?;

    let subset = rps.subset(&result.selected);
    let subset_path = out.join("rp_selected.csv");
    uatpc::io::write_matrix_csv(&subset_path, subset.matrix(), subset.origin_ids(), ap_ids)
        .map_err(|e| CliError::stage("select", e))?;
    Ok(vec![embedding_path, selection_path, subset_path])
}
