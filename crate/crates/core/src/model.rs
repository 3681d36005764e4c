//! Domain types shared across the toolkit: access points, network topology,
//! neighbor measurement records, reference points and power configurations.
//!
//! All types are immutable after construction and safe to share across
//! threads. Path loss is carried as positive dB attenuation, received signal
//! strength as dBm.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Path loss assigned to an AP pair with no measurement in either direction.
/// 100 dB keeps the pair out of carrier-sense range at every allowed power
/// level under the default -82 dBm threshold.
pub const UNMEASURED_AP_PL_DB: f64 = 100.0;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("network has no access points")]
    NoAps,
    #[error("duplicate AP id `{0}`")]
    DuplicateApId(String),
    #[error("AP `{0}` has an empty allowed-level set")]
    EmptyAllowedLevels(String),
    #[error("ap_pl matrix is {rows}x{cols}, expected {expected}x{expected}")]
    BadPlShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("AP-AP path loss at ({row}, {col}) is not a finite non-negative value")]
    BadApPl { row: usize, col: usize },
    #[error("channel_overlap matrix must be square, symmetric and true on the diagonal")]
    BadOverlap,
    #[error("reference-point matrix has {got} columns, expected {expected}")]
    BadRpWidth { got: usize, expected: usize },
    #[error("non-finite or negative path loss in reference-point row {0}")]
    BadRpValue(usize),
    #[error("{got} origin ids for {rows} reference-point rows")]
    BadOriginLen { got: usize, rows: usize },
    #[error("power level {level} dBm is not in the allowed set of AP `{ap}`")]
    LevelNotAllowed { ap: String, level: i32 },
    #[error("power config has {got} levels, expected {expected}")]
    BadConfigLen { got: usize, expected: usize },
}

/// Dense row-major matrix of `f64`. Rows are reference points or APs
/// depending on context; no missing entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds from row vectors. Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in &rows {
            assert_eq!(row.len(), n_cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// One WLAN access point: identifier, the discrete transmit power levels it
/// accepts (dBm, strictly increasing) and its channel index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessPoint {
    pub id: String,
    pub allowed_levels: Vec<i32>,
    pub channel: u32,
}

impl AccessPoint {
    pub fn new(id: impl Into<String>, allowed_levels: Vec<i32>, channel: u32) -> Self {
        Self {
            id: id.into(),
            allowed_levels,
            channel,
        }
    }

    pub fn max_level(&self) -> i32 {
        *self.allowed_levels.last().expect("validated non-empty")
    }

    pub fn min_level(&self) -> i32 {
        *self.allowed_levels.first().expect("validated non-empty")
    }
}

/// One 802.11k neighbor sample: a station's partial path-loss vector toward
/// the APs it could hear at one point in time.
///
/// Timestamps are informational only; nothing in the pipeline orders on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub ts: i64,
    pub sta_id: String,
    pub serving_ap: String,
    /// AP id -> path loss in dB. At least one entry; always contains
    /// `serving_ap`; all values finite and non-negative.
    pub pl: BTreeMap<String, f64>,
}

impl MeasurementRecord {
    /// Record-level invariant check, used by the parsers. Returns the reason
    /// a record must be rejected, if any.
    pub fn violation(&self) -> Option<String> {
        if self.pl.is_empty() {
            return Some("no path-loss entries".into());
        }
        if !self.pl.contains_key(&self.serving_ap) {
            return Some("serving not measured".into());
        }
        for (ap, &pl) in &self.pl {
            if !pl.is_finite() {
                return Some(format!("non-finite path loss toward `{ap}`"));
            }
            if pl < 0.0 {
                return Some(format!("negative path loss toward `{ap}`"));
            }
        }
        None
    }

    pub fn visible_count(&self) -> usize {
        self.pl.len()
    }

    /// Expands the sparse map into a per-AP slot vector following `ap_ids`
    /// order. Entries toward APs outside `ap_ids` are dropped.
    pub fn partial_row(&self, ap_ids: &[String]) -> Vec<Option<f64>> {
        ap_ids.iter().map(|id| self.pl.get(id).copied()).collect()
    }
}

/// The network under optimization: AP set, symmetric AP-AP path-loss matrix
/// and channel-contention structure.
#[derive(Debug, Clone)]
pub struct NetworkInstance {
    aps: Vec<AccessPoint>,
    ap_pl: DenseMatrix,
    overlap: Vec<bool>,
    id_to_index: HashMap<String, usize>,
}

impl NetworkInstance {
    /// Builds an instance from possibly-directed AP-AP readings.
    ///
    /// The path-loss matrix is symmetrized at ingest: both directions
    /// measured -> arithmetic mean; one direction -> used for both; neither
    /// -> [`UNMEASURED_AP_PL_DB`]. The diagonal is forced to zero. Allowed
    /// level sets are sorted and deduplicated. Channel overlap defaults to
    /// channel equality when no explicit matrix is supplied.
    pub fn new(
        aps: Vec<AccessPoint>,
        directed_pl: &[Vec<Option<f64>>],
        overlap: Option<&[Vec<bool>]>,
    ) -> Result<Self, ModelError> {
        let n = aps.len();
        if n == 0 {
            return Err(ModelError::NoAps);
        }
        let mut id_to_index = HashMap::with_capacity(n);
        let mut aps = aps;
        for (i, ap) in aps.iter_mut().enumerate() {
            if id_to_index.insert(ap.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateApId(ap.id.clone()));
            }
            ap.allowed_levels.sort_unstable();
            ap.allowed_levels.dedup();
            if ap.allowed_levels.is_empty() {
                return Err(ModelError::EmptyAllowedLevels(ap.id.clone()));
            }
        }

        if directed_pl.len() != n || directed_pl.iter().any(|r| r.len() != n) {
            return Err(ModelError::BadPlShape {
                rows: directed_pl.len(),
                cols: directed_pl.first().map_or(0, Vec::len),
                expected: n,
            });
        }
        for (i, row) in directed_pl.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                if let Some(v) = entry {
                    if !v.is_finite() || *v < 0.0 {
                        return Err(ModelError::BadApPl { row: i, col: j });
                    }
                }
            }
        }
        let mut ap_pl = DenseMatrix::filled(n, n, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = match (directed_pl[i][j], directed_pl[j][i]) {
                    (Some(a), Some(b)) => (a + b) / 2.0,
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => UNMEASURED_AP_PL_DB,
                };
                ap_pl.set(i, j, v);
                ap_pl.set(j, i, v);
            }
        }

        let overlap = match overlap {
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(ModelError::BadOverlap);
                }
                for i in 0..n {
                    if !rows[i][i] {
                        return Err(ModelError::BadOverlap);
                    }
                    for j in 0..n {
                        if rows[i][j] != rows[j][i] {
                            return Err(ModelError::BadOverlap);
                        }
                    }
                }
                rows.iter().flatten().copied().collect()
            }
            None => {
                let mut m = vec![false; n * n];
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] = aps[i].channel == aps[j].channel;
                    }
                }
                m
            }
        };

        Ok(Self {
            aps,
            ap_pl,
            overlap,
            id_to_index,
        })
    }

    pub fn n_aps(&self) -> usize {
        self.aps.len()
    }

    pub fn aps(&self) -> &[AccessPoint] {
        &self.aps
    }

    pub fn ap(&self, index: usize) -> &AccessPoint {
        &self.aps[index]
    }

    pub fn ap_index(&self, id: &str) -> Option<usize> {
        self.id_to_index.get(id).copied()
    }

    pub fn ap_ids(&self) -> Vec<String> {
        self.aps.iter().map(|ap| ap.id.clone()).collect()
    }

    pub fn ap_pl(&self) -> &DenseMatrix {
        &self.ap_pl
    }

    pub fn pl_between(&self, a: usize, b: usize) -> f64 {
        self.ap_pl.get(a, b)
    }

    /// True when the two APs' channels contend with each other.
    pub fn overlaps(&self, a: usize, b: usize) -> bool {
        self.overlap[a * self.aps.len() + b]
    }
}

/// Downsampled, imputation-completed path-loss map: one fully-populated row
/// per reference point, one column per AP (in instance order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePointSet {
    rp_pl: DenseMatrix,
    origin_ids: Vec<String>,
}

impl ReferencePointSet {
    pub fn new(
        rp_pl: DenseMatrix,
        origin_ids: Vec<String>,
        expected_cols: usize,
    ) -> Result<Self, ModelError> {
        if rp_pl.cols() != expected_cols {
            return Err(ModelError::BadRpWidth {
                got: rp_pl.cols(),
                expected: expected_cols,
            });
        }
        if origin_ids.len() != rp_pl.rows() {
            return Err(ModelError::BadOriginLen {
                got: origin_ids.len(),
                rows: rp_pl.rows(),
            });
        }
        for (i, row) in rp_pl.iter_rows().enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(ModelError::BadRpValue(i));
            }
        }
        Ok(Self { rp_pl, origin_ids })
    }

    pub fn len(&self) -> usize {
        self.rp_pl.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_aps(&self) -> usize {
        self.rp_pl.cols()
    }

    pub fn row(&self, rp: usize) -> &[f64] {
        self.rp_pl.row(rp)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.rp_pl
    }

    pub fn origin_ids(&self) -> &[String] {
        &self.origin_ids
    }

    /// Keeps only the given rows (e.g. a selection result), preserving order
    /// of `indices`.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let rows = indices.iter().map(|&i| self.rp_pl.row(i).to_vec()).collect();
        Self {
            rp_pl: DenseMatrix::from_rows(rows),
            origin_ids: indices.iter().map(|&i| self.origin_ids[i].clone()).collect(),
        }
    }
}

/// One transmit power level per AP, in instance order. The optimizer's
/// decision variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub levels: Vec<i32>,
}

impl PowerConfig {
    pub fn new(levels: Vec<i32>) -> Self {
        Self { levels }
    }

    /// Checks the per-AP allowed-level invariant against an instance.
    pub fn validate(&self, instance: &NetworkInstance) -> Result<(), ModelError> {
        if self.levels.len() != instance.n_aps() {
            return Err(ModelError::BadConfigLen {
                got: self.levels.len(),
                expected: instance.n_aps(),
            });
        }
        for (level, ap) in self.levels.iter().zip(instance.aps()) {
            if !ap.allowed_levels.contains(level) {
                return Err(ModelError::LevelNotAllowed {
                    ap: ap.id.clone(),
                    level: *level,
                });
            }
        }
        Ok(())
    }
}

/// Knobs of the utility evaluation that the underlying radio standard does
/// not pin down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityParams {
    /// RSSI above which a transmitter is audible and hence contends.
    /// -82 dBm is the 802.11 preamble-detection convention.
    pub cs_threshold_dbm: f64,
    /// Floor for the load+interference denominator.
    pub epsilon: f64,
}

impl Default for UtilityParams {
    fn default() -> Self {
        Self {
            cs_threshold_dbm: -82.0,
            epsilon: 1e-9,
        }
    }
}
