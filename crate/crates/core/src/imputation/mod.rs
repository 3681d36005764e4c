//! Path-loss map completion: per-AP regression datasets from partial
//! neighbor reports, per-AP neural regressors, constant-fill baselines, the
//! hide-and-impute accuracy harness, and the end-to-end utility-degradation
//! study that quantifies what bad imputation costs the optimizer.

pub mod nn;

use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DenseMatrix, MeasurementRecord, ReferencePointSet, UtilityParams};
use crate::optimizer::{local_search_restarts, optimality_gap};
use crate::sim::network_utility;
use crate::stats::{mean_std, median, quantile};
use crate::synth::{gen_uniform_scenario, obfuscate, PlParams};

pub use nn::{Regressor, TrainReport};

/// Imputed values are physical attenuations: clamp to this range (dB).
pub const PL_CLAMP_MAX_DB: f64 = 120.0;
/// Records need this many visible entries to contribute training samples.
pub const DEFAULT_MIN_VISIBLE: usize = 4;
/// Inference needs at least this many present entries.
pub const MIN_PRESENT_FOR_IMPUTE: usize = 3;
/// "Beyond interference range" constant fill.
pub const DEFAULT_HIGH_FILL_DB: f64 = 100.0;

#[derive(Debug, Error)]
pub enum ImputeError {
    #[error("no observed path-loss values")]
    NoObservations,
    #[error("row has {0} present entries; imputation needs at least {MIN_PRESENT_FOR_IMPUTE}")]
    NotImputable(usize),
    #[error("per-AP dataset for `{0}` has an empty training split")]
    EmptyTrainingSplit(String),
    #[error("no records are eligible for hiding {0} entries")]
    NoEligibleRecords(usize),
    #[error("model file `{0}`: {1}")]
    BadModelFile(String, String),
    #[error("model directory is internally inconsistent or does not match the expected AP order")]
    InconsistentModel,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Global standardization constants for PL values (dB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean_db: f64,
    pub std_db: f64,
}

impl Normalization {
    /// Mean and population std of the observed values; degenerate spreads
    /// fall back to a unit scale so standardization stays invertible.
    pub fn fit(values: &[f64]) -> Result<Self, ImputeError> {
        let (mean, std) = mean_std(values).ok_or(ImputeError::NoObservations)?;
        Ok(Self {
            mean_db: mean,
            std_db: if std <= 1e-9 { 1.0 } else { std },
        })
    }

    pub fn standardize(&self, v: f64) -> f64 {
        (v - self.mean_db) / self.std_db
    }

    pub fn destandardize(&self, z: f64) -> f64 {
        z * self.std_db + self.mean_db
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Labeled samples for one AP's regressor: inputs are full-width masked
/// feature vectors (2 slots per AP: standardized value, presence flag) with
/// the target AP hidden; labels are the hidden PL in dB.
#[derive(Debug, Clone)]
pub struct PerApDataset {
    pub ap_index: usize,
    pub inputs: Vec<Vec<f32>>,
    pub labels_db: Vec<f64>,
    pub split: Vec<Split>,
}

impl PerApDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn indices_of(&self, which: Split) -> Vec<usize> {
        (0..self.split.len()).filter(|&i| self.split[i] == which).collect()
    }
}

/// Feature encoding shared by training and inference: 2·|AP| slots — the
/// standardized value and a 0/1 presence flag per AP. Absent (or hidden)
/// entries contribute zeros to both slots.
fn encode_features(row: &[Option<f64>], hide: Option<usize>, norm: &Normalization) -> Vec<f32> {
    let mut features = vec![0.0f32; row.len() * 2];
    for (j, entry) in row.iter().enumerate() {
        if hide == Some(j) {
            continue;
        }
        if let Some(v) = entry {
            features[2 * j] = norm.standardize(*v) as f32;
            features[2 * j + 1] = 1.0;
        }
    }
    features
}

/// Expands records into per-AP slot rows following `ap_ids` order.
/// Entries toward APs outside the universe are dropped.
pub fn rows_from_records(
    records: &[MeasurementRecord],
    ap_ids: &[String],
) -> Vec<Vec<Option<f64>>> {
    records.iter().map(|r| r.partial_row(ap_ids)).collect()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Hide-one-entry dataset construction: every record with at least
/// `min_visible` visible entries contributes one sample per visible entry —
/// that entry becomes the label of the corresponding AP's dataset and the
/// rest form the input. Standardization constants are fit on all visible
/// values of eligible records. Per-dataset 70/15/15 splits are assigned by
/// seeded shuffle.
pub fn build_datasets(
    records: &[MeasurementRecord],
    ap_ids: &[String],
    min_visible: usize,
    seed: u64,
) -> Result<(Vec<PerApDataset>, Normalization), ImputeError> {
    let rows: Vec<Vec<Option<f64>>> = rows_from_records(records, ap_ids)
        .into_iter()
        .filter(|row| row.iter().flatten().count() >= min_visible)
        .collect();
    let observed: Vec<f64> = rows.iter().flat_map(|r| r.iter().flatten().copied()).collect();
    let norm = Normalization::fit(&observed)?;

    let n_aps = ap_ids.len();
    let mut datasets: Vec<PerApDataset> = (0..n_aps)
        .map(|ap_index| PerApDataset {
            ap_index,
            inputs: Vec::new(),
            labels_db: Vec::new(),
            split: Vec::new(),
        })
        .collect();
    for row in &rows {
        for (target, entry) in row.iter().enumerate() {
            if let Some(label) = entry {
                datasets[target].inputs.push(encode_features(row, Some(target), &norm));
                datasets[target].labels_db.push(*label);
            }
        }
    }

    for ds in &mut datasets {
        let n = ds.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ ds.ap_index as u64));
        order.shuffle(&mut rng);
        let n_train = (n as f64 * 0.70).floor() as usize;
        let n_val = (n as f64 * 0.15).floor() as usize;
        let mut split = vec![Split::Test; n];
        for (rank, &row) in order.iter().enumerate() {
            split[row] = if rank < n_train {
                Split::Train
            } else if rank < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
        ds.split = split;
    }
    Ok((datasets, norm))
}

/// Trains one AP's regressor on its dataset (standardized labels, MSE) and
/// reports dB-scale MAE on the train and validation splits.
pub fn train_regressor(
    dataset: &PerApDataset,
    ap_id: &str,
    norm: &Normalization,
    max_epochs: usize,
    seed: u64,
) -> Result<(Regressor, TrainReport), ImputeError> {
    let train_idx = dataset.indices_of(Split::Train);
    if train_idx.is_empty() {
        return Err(ImputeError::EmptyTrainingSplit(ap_id.to_string()));
    }
    let val_idx = dataset.indices_of(Split::Val);
    let labels_std: Vec<f32> =
        dataset.labels_db.iter().map(|&l| norm.standardize(l) as f32).collect();
    Ok(nn::train(
        &dataset.inputs,
        &labels_std,
        &train_idx,
        &val_idx,
        norm.std_db,
        max_epochs,
        seed,
    ))
}

/// One regressor per AP plus the shared normalization and the AP order the
/// feature layout is bound to.
pub struct ImputationModel {
    pub ap_ids: Vec<String>,
    pub norm: Normalization,
    /// `None` when that AP had no training data; such APs impute to the
    /// global mean.
    pub regressors: Vec<Option<Regressor>>,
    pub reports: Vec<Option<TrainReport>>,
}

impl ImputationModel {
    /// Builds datasets from the records and trains every AP that has data.
    /// APs without a populated training split fall back to mean prediction
    /// (with a warning) rather than failing the whole model.
    pub fn train(
        records: &[MeasurementRecord],
        ap_ids: &[String],
        min_visible: usize,
        max_epochs: usize,
        seed: u64,
    ) -> Result<Self, ImputeError> {
        let (datasets, norm) = build_datasets(records, ap_ids, min_visible, seed)?;
        let mut regressors = Vec::with_capacity(ap_ids.len());
        let mut reports = Vec::with_capacity(ap_ids.len());
        for (ap, ds) in datasets.iter().enumerate() {
            match train_regressor(ds, &ap_ids[ap], &norm, max_epochs, splitmix64(seed ^ (ap as u64) << 8)) {
                Ok((net, report)) => {
                    log::debug!(
                        "trained `{}`: {} rows, val MAE {:.2} dB ({} epochs)",
                        ap_ids[ap],
                        ds.len(),
                        report.val_mae_db,
                        report.epochs_run
                    );
                    regressors.push(Some(net));
                    reports.push(Some(report));
                }
                Err(ImputeError::EmptyTrainingSplit(_)) => {
                    log::warn!(
                        "no training rows for `{}`; it will impute to the global mean",
                        ap_ids[ap]
                    );
                    regressors.push(None);
                    reports.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Self {
            ap_ids: ap_ids.to_vec(),
            norm,
            regressors,
            reports,
        })
    }

    /// Completes one partial row: present entries pass through unchanged,
    /// each missing entry is predicted by its AP's regressor from the
    /// present ones, clamped to the physical range. Needs at least
    /// [`MIN_PRESENT_FOR_IMPUTE`] present entries.
    pub fn impute(&self, row: &[Option<f64>]) -> Result<Vec<f64>, ImputeError> {
        assert_eq!(row.len(), self.ap_ids.len(), "row width != model AP count");
        let present = row.iter().flatten().count();
        if present < MIN_PRESENT_FOR_IMPUTE {
            return Err(ImputeError::NotImputable(present));
        }
        // the feature vector is identical for every missing target: absent
        // slots are zero either way
        let features = encode_features(row, None, &self.norm);
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, entry)| match entry {
                Some(v) => *v,
                None => {
                    let db = match &self.regressors[j] {
                        Some(net) => self.norm.destandardize(net.predict(&features) as f64),
                        None => self.norm.mean_db,
                    };
                    db.clamp(0.0, PL_CLAMP_MAX_DB)
                }
            })
            .collect())
    }

    /// Serializes one self-describing JSON file per AP into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), ImputeError> {
        fs::create_dir_all(dir)?;
        for (i, regressor) in self.regressors.iter().enumerate() {
            let file = RegressorFile {
                ap_index: i,
                ap_id: self.ap_ids[i].clone(),
                ap_ids: self.ap_ids.clone(),
                norm: self.norm,
                regressor: regressor.clone(),
                report: self.reports[i].clone(),
            };
            let path = dir.join(format!("regressor_{i:03}.json"));
            fs::write(&path, serde_json::to_vec(&file).expect("serializable"))?;
        }
        Ok(())
    }

    /// Loads a directory written by [`ImputationModel::save`]. All files
    /// must agree on the AP order and normalization; when `expected_ap_ids`
    /// is given, the stored order must match it exactly.
    pub fn load(dir: &Path, expected_ap_ids: Option<&[String]>) -> Result<Self, ImputeError> {
        let mut files: Vec<RegressorFile> = Vec::new();
        let mut paths: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("regressor_") && n.ends_with(".json"))
            })
            .collect();
        paths.sort();
        for path in &paths {
            let bytes = fs::read(path)?;
            let file: RegressorFile = serde_json::from_slice(&bytes).map_err(|e| {
                ImputeError::BadModelFile(path.display().to_string(), e.to_string())
            })?;
            files.push(file);
        }
        let first = files.first().ok_or(ImputeError::InconsistentModel)?;
        let ap_ids = first.ap_ids.clone();
        let norm = first.norm;
        if files.len() != ap_ids.len() {
            return Err(ImputeError::InconsistentModel);
        }
        if let Some(expected) = expected_ap_ids {
            if expected != ap_ids.as_slice() {
                return Err(ImputeError::InconsistentModel);
            }
        }
        let mut regressors: Vec<Option<Regressor>> = vec![None; ap_ids.len()];
        let mut reports: Vec<Option<TrainReport>> = vec![None; ap_ids.len()];
        for file in files {
            if file.ap_ids != ap_ids
                || file.norm != norm
                || file.ap_index >= ap_ids.len()
                || file.ap_id != ap_ids[file.ap_index]
            {
                return Err(ImputeError::InconsistentModel);
            }
            regressors[file.ap_index] = file.regressor;
            reports[file.ap_index] = file.report;
        }
        Ok(Self {
            ap_ids,
            norm,
            regressors,
            reports,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RegressorFile {
    ap_index: usize,
    ap_id: String,
    ap_ids: Vec<String>,
    norm: Normalization,
    regressor: Option<Regressor>,
    report: Option<TrainReport>,
}

/// Fills every missing entry with one constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantImputer {
    pub fill_db: f64,
}

impl ConstantImputer {
    pub fn complete(&self, row: &[Option<f64>]) -> Vec<f64> {
        row.iter().map(|e| e.unwrap_or(self.fill_db)).collect()
    }
}

/// Baseline: fill with the global median of all observed values.
pub fn median_imputer(records: &[MeasurementRecord]) -> Result<ConstantImputer, ImputeError> {
    let observed: Vec<f64> = records.iter().flat_map(|r| r.pl.values().copied()).collect();
    let fill = median(&observed).ok_or(ImputeError::NoObservations)?;
    Ok(ConstantImputer { fill_db: fill })
}

/// Baseline: fill with a fixed "out of range" attenuation.
pub fn high_imputer(pl_high_db: f64) -> ConstantImputer {
    ConstantImputer { fill_db: pl_high_db }
}

/// Idealized imputer for studies: missing entries are the ground truth plus
/// zero-mean Gaussian noise scaled so the expected absolute error equals
/// `target_mae_db` (σ = MAE·√(π/2)), clamped to the physical range.
pub fn noisy_oracle_complete<R: Rng>(
    row: &[Option<f64>],
    truth_row: &[f64],
    target_mae_db: f64,
    rng: &mut R,
) -> Vec<f64> {
    assert_eq!(row.len(), truth_row.len());
    let sigma = target_mae_db * (std::f64::consts::PI / 2.0).sqrt();
    let noise = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma"));
    row.iter()
        .zip(truth_row)
        .map(|(entry, &truth)| match entry {
            Some(v) => *v,
            None => {
                let draw = noise.as_ref().map_or(0.0, |n| n.sample(rng));
                (truth + draw).clamp(0.0, PL_CLAMP_MAX_DB)
            }
        })
        .collect()
}

/// Absolute-error distribution of a hide-and-impute run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub n_records: usize,
    pub errors_db: Vec<f64>,
    pub mean_db: f64,
    pub median_db: f64,
    pub q1_db: f64,
    pub q3_db: f64,
}

impl ErrorSummary {
    fn from_errors(n_records: usize, errors_db: Vec<f64>) -> Self {
        let mean = errors_db.iter().sum::<f64>() / errors_db.len().max(1) as f64;
        Self {
            n_records,
            mean_db: mean,
            median_db: median(&errors_db).unwrap_or(0.0),
            q1_db: quantile(&errors_db, 0.25).unwrap_or(0.0),
            q3_db: quantile(&errors_db, 0.75).unwrap_or(0.0),
            errors_db,
        }
    }
}

/// Accuracy harness: per eligible record (≥ `n_hidden` + 3 present
/// entries), hide `n_hidden` seeded-uniformly chosen present entries,
/// impute, and collect the absolute error of every hidden entry. Hiding
/// nothing yields one zero error per eligible record (the reconstruction
/// is exact on present entries).
pub fn hide_and_impute_eval(
    records: &[MeasurementRecord],
    model: &ImputationModel,
    n_hidden: usize,
    seed: u64,
) -> Result<ErrorSummary, ImputeError> {
    let rows = rows_from_records(records, &model.ap_ids);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors = Vec::new();
    let mut n_records = 0usize;
    for row in &rows {
        let present: Vec<usize> =
            (0..row.len()).filter(|&j| row[j].is_some()).collect();
        if present.len() < n_hidden + MIN_PRESENT_FOR_IMPUTE {
            continue;
        }
        n_records += 1;
        if n_hidden == 0 {
            errors.push(0.0);
            continue;
        }
        let hide: Vec<usize> = rand::seq::index::sample(&mut rng, present.len(), n_hidden)
            .iter()
            .map(|k| present[k])
            .collect();
        let mut masked = row.clone();
        for &j in &hide {
            masked[j] = None;
        }
        let completed = model.impute(&masked)?;
        for &j in &hide {
            errors.push((completed[j] - row[j].expect("hidden entries were present")).abs());
        }
    }
    if n_records == 0 {
        return Err(ImputeError::NoEligibleRecords(n_hidden));
    }
    Ok(ErrorSummary::from_errors(n_records, errors))
}

/// Constant-fill strategies compared by the utility-degradation study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FillStrategy {
    /// Missing = beyond interference range.
    High { fill_db: f64 },
    /// Missing = global median of what the obfuscated records still show.
    Median,
    /// Missing = ground truth + noise at a target MAE.
    NoisyOracle { mae_db: f64 },
}

impl FillStrategy {
    pub fn name(&self) -> String {
        match self {
            FillStrategy::High { fill_db } => format!("high{fill_db:.0}"),
            FillStrategy::Median => "median".into(),
            FillStrategy::NoisyOracle { mae_db } => format!("oracle{mae_db:.0}db"),
        }
    }
}

/// Parameters of [`utility_degradation_study`].
#[derive(Debug, Clone)]
pub struct DegradationConfig {
    pub n_topologies: usize,
    pub n_aps: usize,
    pub n_rps: usize,
    pub side_m: f64,
    pub levels: Vec<i32>,
    pub visible_counts: Vec<usize>,
    pub strategies: Vec<FillStrategy>,
    pub trials_per_ap: Option<usize>,
    /// Wall-clock budget per search run, not per topology.
    pub time_cap_s: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for DegradationConfig {
    fn default() -> Self {
        Self {
            n_topologies: 32,
            n_aps: 33,
            n_rps: 330,
            side_m: 100.0,
            levels: vec![4, 8, 12, 16, 20, 24, 28, 32],
            visible_counts: vec![2, 6, 12, 24],
            strategies: vec![
                FillStrategy::High { fill_db: DEFAULT_HIGH_FILL_DB },
                FillStrategy::Median,
                FillStrategy::NoisyOracle { mae_db: 5.0 },
            ],
            trials_per_ap: Some(15),
            time_cap_s: None,
            restarts: 1,
            seed: 0,
        }
    }
}

/// One (visible count, strategy) cell: per-topology utility losses against
/// the full-visibility search result, in percent on the linear scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationCell {
    pub visible: usize,
    pub strategy: String,
    pub losses_pct: Vec<f64>,
    pub median_loss_pct: f64,
    pub q1_loss_pct: f64,
    pub q3_loss_pct: f64,
}

/// How much optimizing on a badly completed map costs: per topology, run
/// the search on the true map (reference), then obfuscate → fill → search
/// → evaluate the resulting configuration on the *true* map, and report the
/// loss distribution per (visible count, strategy).
///
/// The search seed is shared between the reference and every cell, so with
/// no time cap a fill that reconstructs the map exactly reproduces the
/// reference run and scores exactly zero loss. (A wall-clock cap can cut
/// runs at different points and breaks that exactness.)
pub fn utility_degradation_study(cfg: &DegradationConfig) -> Vec<DegradationCell> {
    let params = UtilityParams::default();
    let mut cells: Vec<DegradationCell> = Vec::new();
    for &visible in &cfg.visible_counts {
        for strategy in &cfg.strategies {
            cells.push(DegradationCell {
                visible,
                strategy: strategy.name(),
                losses_pct: Vec::new(),
                median_loss_pct: 0.0,
                q1_loss_pct: 0.0,
                q3_loss_pct: 0.0,
            });
        }
    }

    for topo in 0..cfg.n_topologies {
        let topo_seed = splitmix64(cfg.seed ^ (topo as u64 + 1));
        let scenario = gen_uniform_scenario(
            cfg.n_aps,
            cfg.n_rps,
            cfg.side_m,
            &cfg.levels,
            None,
            &PlParams::default(),
            topo_seed,
        );
        let ls_seed = splitmix64(topo_seed ^ 0x5ea5);
        let reference = local_search_restarts(
            &scenario.instance,
            &scenario.ground_truth,
            cfg.trials_per_ap,
            cfg.time_cap_s,
            ls_seed,
            &params,
            cfg.restarts,
        )
        .expect("non-empty ground truth");
        let u_ref = reference.best_utility;

        let mut cell_idx = 0;
        for &visible in &cfg.visible_counts {
            let records = obfuscate(&scenario.ground_truth, &scenario.instance, visible);
            let rows = rows_from_records(&records, &scenario.instance.ap_ids());
            for strategy in &cfg.strategies {
                let mut noise_rng = ChaCha8Rng::seed_from_u64(splitmix64(
                    topo_seed ^ ((visible as u64) << 16) ^ cell_idx as u64,
                ));
                let filled: Vec<Vec<f64>> = match strategy {
                    FillStrategy::High { fill_db } => {
                        let imp = high_imputer(*fill_db);
                        rows.iter().map(|r| imp.complete(r)).collect()
                    }
                    FillStrategy::Median => {
                        let imp = median_imputer(&records).expect("records have entries");
                        rows.iter().map(|r| imp.complete(r)).collect()
                    }
                    FillStrategy::NoisyOracle { mae_db } => rows
                        .iter()
                        .enumerate()
                        .map(|(i, r)| {
                            noisy_oracle_complete(
                                r,
                                scenario.ground_truth.row(i),
                                *mae_db,
                                &mut noise_rng,
                            )
                        })
                        .collect(),
                };
                let imputed_rps = ReferencePointSet::new(
                    DenseMatrix::from_rows(filled),
                    records.iter().map(|r| r.sta_id.clone()).collect(),
                    cfg.n_aps,
                )
                .expect("filled rows are complete");
                let report = local_search_restarts(
                    &scenario.instance,
                    &imputed_rps,
                    cfg.trials_per_ap,
                    cfg.time_cap_s,
                    ls_seed,
                    &params,
                    cfg.restarts,
                )
                .expect("non-empty imputed set");
                let true_utility = network_utility(
                    &scenario.ground_truth,
                    &report.best_config,
                    &scenario.instance,
                    &params,
                )
                .total;
                cells[cell_idx].losses_pct.push(optimality_gap(true_utility, u_ref));
                cell_idx += 1;
            }
        }
    }

    for cell in &mut cells {
        cell.median_loss_pct = median(&cell.losses_pct).unwrap_or(0.0);
        cell.q1_loss_pct = quantile(&cell.losses_pct, 0.25).unwrap_or(0.0);
        cell.q3_loss_pct = quantile(&cell.losses_pct, 0.75).unwrap_or(0.0);
    }
    cells
}
