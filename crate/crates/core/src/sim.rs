//! Trace-driven utility simulation: signal/association model, load and
//! interference proxies, and the log-utility objective the optimizers
//! maximize. Also hosts the Pearson correlation used by the validation
//! studies.
//!
//! Everything here is deterministic: identical inputs give bit-identical
//! results regardless of thread count (per-point terms are accumulated in
//! fixed point order).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::model::{NetworkInstance, PowerConfig, ReferencePointSet, UtilityParams};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("series lengths differ: {0} vs {1}")]
    MismatchedLengths(usize, usize),
    #[error("need at least 3 samples for a correlation, got {0}")]
    TooShort(usize),
    #[error("correlation undefined: {0} series is constant")]
    ConstantSeries(&'static str),
}

/// RSSI in dBm seen from a transmitter at `power_dbm` through `pl_db` of
/// attenuation.
#[inline]
pub fn received_signal(power_dbm: f64, pl_db: f64) -> f64 {
    power_dbm - pl_db
}

/// Linear received power in mW for an RSSI in dBm.
#[inline]
fn sig_mw(rssi_dbm: f64) -> f64 {
    10.0_f64.powf(rssi_dbm / 10.0)
}

/// Index of the AP a station at this point associates with: strongest
/// received signal, ties broken toward the lowest AP index.
///
/// Panics on an empty row (instances are validated to have ≥ 1 AP).
pub fn associate(rp_row: &[f64], config: &PowerConfig) -> usize {
    assert!(!rp_row.is_empty(), "empty AP set");
    let mut best = 0;
    let mut best_rssi = received_signal(config.levels[0] as f64, rp_row[0]);
    for a in 1..rp_row.len() {
        let rssi = received_signal(config.levels[a] as f64, rp_row[a]);
        if rssi > best_rssi {
            best_rssi = rssi;
            best = a;
        }
    }
    best
}

/// Per-AP load fractions under strongest-signal association and uniform
/// traffic: the share of points each AP serves. Sums to 1.
pub fn ap_loads(rps: &ReferencePointSet, config: &PowerConfig) -> Vec<f64> {
    assert!(!rps.is_empty(), "empty reference-point set");
    let mut counts = vec![0usize; rps.n_aps()];
    for rp in 0..rps.len() {
        counts[associate(rps.row(rp), config)] += 1;
    }
    let n = rps.len() as f64;
    counts.iter().map(|&c| c as f64 / n).collect()
}

/// Load-weighted count of co-channel APs (other than the serving one) whose
/// signal at this point reaches the carrier-sense threshold.
pub fn interference_at(
    rp_row: &[f64],
    config: &PowerConfig,
    instance: &NetworkInstance,
    loads: &[f64],
    params: &UtilityParams,
) -> f64 {
    let serving = associate(rp_row, config);
    interference_for(rp_row, serving, &config.levels, instance, loads, params)
}

fn interference_for(
    rp_row: &[f64],
    serving: usize,
    levels: &[i32],
    instance: &NetworkInstance,
    loads: &[f64],
    params: &UtilityParams,
) -> f64 {
    let mut interference = 0.0;
    for a in 0..rp_row.len() {
        if a == serving || !instance.overlaps(a, serving) {
            continue;
        }
        if received_signal(levels[a] as f64, rp_row[a]) >= params.cs_threshold_dbm {
            interference += loads[a];
        }
    }
    interference
}

/// Per-point utility: linear received power over the serving AP's load plus
/// interference (floored at `params.epsilon`). Strictly positive.
pub fn utility_ref(
    rp_row: &[f64],
    config: &PowerConfig,
    instance: &NetworkInstance,
    loads: &[f64],
    params: &UtilityParams,
) -> f64 {
    let serving = associate(rp_row, config);
    let rssi = received_signal(config.levels[serving] as f64, rp_row[serving]);
    let interference =
        interference_for(rp_row, serving, &config.levels, instance, loads, params);
    sig_mw(rssi) / (loads[serving] + interference).max(params.epsilon)
}

/// One point's contribution to a [`UtilityBreakdown`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpTerm {
    pub rp_index: usize,
    pub serving: usize,
    pub rssi_dbm: f64,
    pub load: f64,
    pub interference: f64,
    /// Pre-log per-point utility.
    pub utility: f64,
}

/// Network utility (sum over points of the log per-point utility) together
/// with its per-point decomposition, in point order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityBreakdown {
    pub total: f64,
    pub terms: Vec<RpTerm>,
}

/// Evaluates a power configuration over every reference point. The log sum
/// rewards raising the worst points over inflating already-good ones.
pub fn network_utility(
    rps: &ReferencePointSet,
    config: &PowerConfig,
    instance: &NetworkInstance,
    params: &UtilityParams,
) -> UtilityBreakdown {
    let loads = ap_loads(rps, config);
    let mut total = 0.0;
    let mut terms = Vec::with_capacity(rps.len());
    for rp in 0..rps.len() {
        let row = rps.row(rp);
        let serving = associate(row, config);
        let rssi = received_signal(config.levels[serving] as f64, row[serving]);
        let interference =
            interference_for(row, serving, &config.levels, instance, &loads, params);
        let utility = sig_mw(rssi) / (loads[serving] + interference).max(params.epsilon);
        total += utility.ln();
        terms.push(RpTerm {
            rp_index: rp,
            serving,
            rssi_dbm: rssi,
            load: loads[serving],
            interference,
            utility,
        });
    }
    UtilityBreakdown { total, terms }
}

/// Reusable total-utility evaluator for the searchers: same arithmetic as
/// [`network_utility`] without building the per-point breakdown, with
/// association/load scratch buffers reused across calls.
pub struct Evaluator<'a> {
    instance: &'a NetworkInstance,
    rps: &'a ReferencePointSet,
    params: UtilityParams,
    servings: Vec<usize>,
    loads: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        instance: &'a NetworkInstance,
        rps: &'a ReferencePointSet,
        params: UtilityParams,
    ) -> Self {
        assert_eq!(
            instance.n_aps(),
            rps.n_aps(),
            "instance and reference points disagree on AP count"
        );
        assert!(!rps.is_empty(), "empty reference-point set");
        Self {
            instance,
            rps,
            params,
            servings: vec![0; rps.len()],
            loads: vec![0.0; instance.n_aps()],
        }
    }

    pub fn params(&self) -> &UtilityParams {
        &self.params
    }

    /// Total network utility of `levels` (one dBm level per AP, instance
    /// order). Bit-identical to `network_utility(...).total`.
    pub fn evaluate(&mut self, levels: &[i32]) -> f64 {
        let n_rps = self.rps.len();
        self.loads.iter_mut().for_each(|l| *l = 0.0);
        for rp in 0..n_rps {
            let row = self.rps.row(rp);
            let mut best = 0;
            let mut best_rssi = received_signal(levels[0] as f64, row[0]);
            for a in 1..row.len() {
                let rssi = received_signal(levels[a] as f64, row[a]);
                if rssi > best_rssi {
                    best_rssi = rssi;
                    best = a;
                }
            }
            self.servings[rp] = best;
            self.loads[best] += 1.0;
        }
        self.loads.iter_mut().for_each(|l| *l /= n_rps as f64);

        let mut total = 0.0;
        for rp in 0..n_rps {
            let row = self.rps.row(rp);
            let serving = self.servings[rp];
            let rssi = received_signal(levels[serving] as f64, row[serving]);
            let interference = interference_for(
                row,
                serving,
                levels,
                self.instance,
                &self.loads,
                &self.params,
            );
            let utility =
                sig_mw(rssi) / (self.loads[serving] + interference).max(self.params.epsilon);
            total += utility.ln();
        }
        total
    }
}

/// Pearson product-moment correlation with a two-sided p-value from the
/// t distribution on n−2 degrees of freedom.
///
/// Computed with a one-pass Welford co-moment update. Exactly constant
/// input (zero second moment) is rejected as undefined.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), SimError> {
    if xs.len() != ys.len() {
        return Err(SimError::MismatchedLengths(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(SimError::TooShort(n));
    }
    let mut mean_x = 0.0;
    let mut mean_y = 0.0;
    let mut m2x = 0.0;
    let mut m2y = 0.0;
    let mut cxy = 0.0;
    for i in 0..n {
        let k = (i + 1) as f64;
        let dx = xs[i] - mean_x;
        mean_x += dx / k;
        let dy = ys[i] - mean_y;
        mean_y += dy / k;
        // co-moment uses the pre-update x delta and post-update y mean
        m2x += dx * (xs[i] - mean_x);
        m2y += dy * (ys[i] - mean_y);
        cxy += dx * (ys[i] - mean_y);
    }
    if m2x == 0.0 {
        return Err(SimError::ConstantSeries("x"));
    }
    if m2y == 0.0 {
        return Err(SimError::ConstantSeries("y"));
    }
    let r = (cxy / (m2x * m2y).sqrt()).clamp(-1.0, 1.0);
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = r.abs() * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        2.0 * dist.sf(t)
    };
    Ok((r, p))
}
