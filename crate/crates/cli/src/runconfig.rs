//! Declarative run configuration for the pipeline: one JSON file holding
//! every stage's parameters; explicit CLI flags override individual fields.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::errors::{input_err, CliError};

pub const DEFAULT_LEVELS: [i32; 8] = [4, 8, 12, 16, 20, 24, 28, 32];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub impute: ImputeConfig,
    pub select: SelectConfig,
    pub optimize: OptimizeConfig,
    pub utility: UtilityConfig,
    /// Target neighbor level for the threshold baseline, dBm.
    pub tpc_threshold_dbm: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            impute: ImputeConfig::default(),
            select: SelectConfig::default(),
            optimize: OptimizeConfig::default(),
            utility: UtilityConfig::default(),
            tpc_threshold_dbm: -70.0,
        }
    }
}

impl RunConfig {
    /// Loads the file when given; otherwise returns defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let bytes = std::fs::read(p)
                    .map_err(|e| input_err(format!("{}: {e}", p.display())))?;
                serde_json::from_slice(&bytes)
                    .map_err(|e| input_err(format!("{}: {e}", p.display())))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// "uniform" or "hotspot" station placement.
    pub placement: String,
    pub n_aps: usize,
    pub n_stas: usize,
    pub side_m: f64,
    pub levels_dbm: Vec<i32>,
    /// Channel assignment, cycled over APs; empty = everyone on one channel.
    pub channels: Vec<u32>,
    pub pl0_db: f64,
    pub ref_dist_m: f64,
    pub exponent: f64,
    pub shadowing_sigma_db: f64,
    pub n_hotspots: usize,
    pub clustered_fraction: f64,
    pub cluster_sigma_m: f64,
    /// Visible APs per measurement record (nearest-k); 0 = no obfuscation.
    pub visible: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            placement: "uniform".into(),
            n_aps: 10,
            n_stas: 400,
            side_m: 100.0,
            levels_dbm: DEFAULT_LEVELS.to_vec(),
            channels: vec![36, 40, 44],
            pl0_db: 40.0,
            ref_dist_m: 1.0,
            exponent: 3.0,
            shadowing_sigma_db: 0.0,
            n_hotspots: 50,
            clustered_fraction: 0.9,
            cluster_sigma_m: 2.0,
            visible: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImputeConfig {
    pub min_visible: usize,
    pub epochs: usize,
    /// Fallback for rows too sparse to impute: "median" or "high".
    pub fallback: String,
}

impl Default for ImputeConfig {
    fn default() -> Self {
        Self {
            min_visible: 4,
            epochs: 150,
            fallback: "median".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectConfig {
    /// "uniform" or "stratified".
    pub method: String,
    /// "pca" or "tsne".
    pub projection: String,
    /// Uniform selection size.
    pub k: usize,
    /// Stratified radius in embedding units; 0 = use radius_quantile.
    pub radius: f64,
    /// Pairwise-distance quantile standing in for an absolute radius.
    pub radius_quantile: f64,
    pub perplexity: f64,
    pub iterations: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            method: "stratified".into(),
            projection: "pca".into(),
            k: 100,
            radius: 0.0,
            radius_quantile: 0.05,
            perplexity: 40.0,
            iterations: 2500,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    /// Candidate levels tried per AP and pass; 0 = try every allowed level.
    pub trials_per_ap: usize,
    pub time_cap_s: f64,
    pub restarts: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            trials_per_ap: 15,
            time_cap_s: 600.0,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UtilityConfig {
    pub cs_threshold_dbm: f64,
    pub epsilon: f64,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        let p = uatpc::UtilityParams::default();
        Self {
            cs_threshold_dbm: p.cs_threshold_dbm,
            epsilon: p.epsilon,
        }
    }
}

impl UtilityConfig {
    pub fn params(&self) -> uatpc::UtilityParams {
        uatpc::UtilityParams {
            cs_threshold_dbm: self.cs_threshold_dbm,
            epsilon: self.epsilon,
        }
    }
}

/// `trials_per_ap` in file form uses 0 for "no cap"; the library wants an
/// `Option`.
pub fn trials_option(trials: usize) -> Option<usize> {
    if trials == 0 {
        None
    } else {
        Some(trials)
    }
}

/// Wall-clock cap in file form uses 0 for "no cap".
pub fn time_cap_option(cap_s: f64) -> Option<f64> {
    if cap_s <= 0.0 {
        None
    } else {
        Some(cap_s)
    }
}
