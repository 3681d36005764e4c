//! Side-by-side evaluation of named power configurations on one
//! reference-point set: utility, signal and interference distributions,
//! mean power, and coverage fractions.

use std::path::Path;

use serde::Serialize;

use uatpc::model::{NetworkInstance, PowerConfig, ReferencePointSet, UtilityParams};
use uatpc::sim::network_utility;
use uatpc::stats::quantile;

use crate::errors::CliError;

pub const GOOD_COVERAGE_DBM: f64 = -65.0;
pub const BAD_COVERAGE_DBM: f64 = -80.0;

#[derive(Debug, Clone, Serialize)]
pub struct ConfigComparison {
    pub name: String,
    pub utility: f64,
    pub mean_power_dbm: f64,
    pub rssi_q1_dbm: f64,
    pub rssi_median_dbm: f64,
    pub rssi_q3_dbm: f64,
    pub interference_q1: f64,
    pub interference_median: f64,
    pub interference_q3: f64,
    /// Fraction of reference points with serving RSSI ≥ −65 dBm.
    pub good_coverage: f64,
    /// Fraction of reference points with serving RSSI < −80 dBm.
    pub bad_coverage: f64,
}

/// Evaluates every configuration on the same reference points and utility
/// parameters.
pub fn compare_configs(
    rps: &ReferencePointSet,
    instance: &NetworkInstance,
    configs: &[(String, PowerConfig)],
    params: &UtilityParams,
) -> Vec<ConfigComparison> {
    configs
        .iter()
        .map(|(name, config)| {
            let breakdown = network_utility(rps, config, instance, params);
            let rssi: Vec<f64> = breakdown.terms.iter().map(|t| t.rssi_dbm).collect();
            let interference: Vec<f64> =
                breakdown.terms.iter().map(|t| t.interference).collect();
            let n = rssi.len() as f64;
            let good = rssi.iter().filter(|&&r| r >= GOOD_COVERAGE_DBM).count() as f64 / n;
            let bad = rssi.iter().filter(|&&r| r < BAD_COVERAGE_DBM).count() as f64 / n;
            let mean_power =
                config.levels.iter().map(|&l| f64::from(l)).sum::<f64>()
                    / config.levels.len() as f64;
            ConfigComparison {
                name: name.clone(),
                utility: breakdown.total,
                mean_power_dbm: mean_power,
                rssi_q1_dbm: quantile(&rssi, 0.25).unwrap_or(f64::NAN),
                rssi_median_dbm: quantile(&rssi, 0.5).unwrap_or(f64::NAN),
                rssi_q3_dbm: quantile(&rssi, 0.75).unwrap_or(f64::NAN),
                interference_q1: quantile(&interference, 0.25).unwrap_or(f64::NAN),
                interference_median: quantile(&interference, 0.5).unwrap_or(f64::NAN),
                interference_q3: quantile(&interference, 0.75).unwrap_or(f64::NAN),
                good_coverage: good,
                bad_coverage: bad,
            }
        })
        .collect()
}

pub fn write_comparison_csv(path: &Path, rows: &[ConfigComparison]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::stage("evaluate", format!("{}: {e}", path.display())))?;
    w.write_record([
        "name",
        "utility",
        "mean_power_dbm",
        "rssi_q1_dbm",
        "rssi_median_dbm",
        "rssi_q3_dbm",
        "interference_q1",
        "interference_median",
        "interference_q3",
        "good_coverage",
        "bad_coverage",
    ])
    .map_err(|e| CliError::stage("evaluate", e))?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            format!("{}", r.utility),
            format!("{}", r.mean_power_dbm),
            format!("{}", r.rssi_q1_dbm),
            format!("{}", r.rssi_median_dbm),
            format!("{}", r.rssi_q3_dbm),
            format!("{}", r.interference_q1),
            format!("{}", r.interference_median),
            format!("{}", r.interference_q3),
            format!("{}", r.good_coverage),
            format!("{}", r.bad_coverage),
        ])
        .map_err(|e| CliError::stage("evaluate", e))?;
    }
    w.flush().map_err(|e| CliError::stage("evaluate", e))?;
    Ok(())
}

/// One-screen text table for the terminal.
pub fn render_comparison(rows: &[ConfigComparison]) -> String {
    let mut out = String::from(
        "name            utility      meanP  rssi(med)  interf(med)  good%   bad%\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{:<15} {:>10.4} {:>8.2} {:>10.2} {:>12.4} {:>6.1} {:>6.1}\n",
            r.name,
            r.utility,
            r.mean_power_dbm,
            r.rssi_median_dbm,
            r.interference_median,
            r.good_coverage * 100.0,
            r.bad_coverage * 100.0,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use uatpc::optimizer::full_power;
    use uatpc::synth::{gen_uniform_scenario, PlParams};

    #[test]
    fn fullpower_has_highest_mean_power() {
        let s = gen_uniform_scenario(
            4,
            12,
            60.0,
            &[4, 12, 20, 28],
            None,
            &PlParams::default(),
            3,
        );
        let fp = full_power(&s.instance);
        let low = PowerConfig { levels: vec![4; 4] };
        let rows = compare_configs(
            &s.ground_truth,
            &s.instance,
            &[("fullpower".into(), fp), ("low".into(), low)],
            &UtilityParams::default(),
        );
        assert!(rows[0].mean_power_dbm > rows[1].mean_power_dbm);
        assert_eq!(rows[0].mean_power_dbm, 28.0);
    }

    #[test]
    fn single_ap_coverage_fractions_by_hand() {
        // one AP at power 20; three RPs with PLs 60 / 90 / 110
        // → RSSIs −40 (good), −70 (neither), −90 (bad)
        let aps = vec![uatpc::AccessPoint::new("a", vec![20], 36)];
        let instance = uatpc::NetworkInstance::new(aps, &[vec![Some(0.0)]], None).unwrap();
        let rps = uatpc::ReferencePointSet::new(
            uatpc::DenseMatrix::from_rows(vec![vec![60.0], vec![90.0], vec![110.0]]),
            vec!["r0".into(), "r1".into(), "r2".into()],
            1,
        )
        .unwrap();
        let config = PowerConfig { levels: vec![20] };
        let rows = compare_configs(
            &rps,
            &instance,
            &[("only".into(), config)],
            &UtilityParams::default(),
        );
        let r = &rows[0];
        assert!((r.good_coverage - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.bad_coverage - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.rssi_median_dbm, -70.0);
    }
}
