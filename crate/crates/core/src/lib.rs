//! User-aware WLAN transmit-power control at desk scale.
//!
//! The crate covers the full offline pipeline for tuning the transmit power
//! of an enterprise WLAN from sparse client measurements:
//!
//! * [`model`] — domain types: access points, network instances with
//!   symmetrized AP-AP path loss, measurement records, reference-point
//!   sets, power configurations.
//! * [`io`] — measurement ingestion (JSON-lines / long CSV) with total
//!   reject accounting, topology and configuration files, CSV emitters.
//! * [`sim`] — trace-driven evaluation: association by strongest signal,
//!   per-AP load, co-channel interference, per-point and network log
//!   utility, plus a correlation metric for validating the evaluator.
//! * [`synth`] — log-distance scenario generation (uniform and hotspot
//!   user placement), ground-truth maps, and partial-visibility
//!   obfuscation that mimics what clients actually report.
//! * [`imputation`] — completing sparse path-loss maps with per-AP neural
//!   regressors, constant-fill baselines, accuracy harnesses, and the
//!   utility-degradation study.
//! * [`selection`] — reference-point subsampling: PCA and t-SNE
//!   embeddings, uniform and stratified (radius-based) selection,
//!   neighborhood statistics.
//! * [`optimizer`] — randomized local search over per-AP power levels,
//!   exhaustive oracle, full-power and threshold-based baselines, and the
//!   optimality-gap metric.
//! * [`stats`] — small shared numeric helpers (means, quantiles).
//!
//! Everything is deterministic given a seed: the same inputs and seeds
//! produce bit-identical outputs, which the test suites rely on.

pub mod imputation;
pub mod io;
pub mod model;
pub mod optimizer;
pub mod selection;
pub mod sim;
pub mod stats;
pub mod synth;

pub use imputation::{
    build_datasets, hide_and_impute_eval, high_imputer, median_imputer, noisy_oracle_complete,
    train_regressor, utility_degradation_study, ConstantImputer, DegradationCell,
    DegradationConfig, ErrorSummary, FillStrategy, ImputationModel, ImputeError, Normalization,
    PerApDataset, Split,
};
pub use io::{IngestReport, IoError};
pub use model::{
    AccessPoint, DenseMatrix, MeasurementRecord, ModelError, NetworkInstance, PowerConfig,
    ReferencePointSet, UtilityParams, UNMEASURED_AP_PL_DB,
};
pub use optimizer::{
    config_space_size, exhaustive_search, full_power, local_search, local_search_restarts,
    optimality_gap, tpcv1_offline, OptError, SearchReport, Termination,
};
pub use selection::{
    distance_quantile, isolated_fraction, neighbor_counts, pca_project, stratified_select,
    tsne_project, uniform_select, Embedding, ProjectionMethod, SelectionError, SelectionMethod,
    SelectionResult,
};
pub use sim::{
    associate, ap_loads, interference_at, network_utility, pearson_r, received_signal,
    utility_ref, Evaluator, RpTerm, SimError, UtilityBreakdown,
};
pub use synth::{
    gen_hotspot_scenario, gen_uniform_scenario, obfuscate, pathloss, HotspotParams, PlParams,
    SyntheticScenario,
};
