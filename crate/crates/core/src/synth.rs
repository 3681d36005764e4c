//! Synthetic scenario generation: random AP/station layouts on a square,
//! log-distance path loss with optional shadowing, hotspot station
//! distributions and nearest-first measurement obfuscation.
//!
//! Every generator is a pure function of its parameters and seed; components
//! draw from independently derived sub-streams so e.g. station placement is
//! identical whether or not hotspot centers were generated.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::model::{
    AccessPoint, DenseMatrix, MeasurementRecord, NetworkInstance, ReferencePointSet,
};

/// Log-distance propagation constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlParams {
    /// Path loss at the reference distance, dB.
    pub pl0_db: f64,
    /// Reference distance, meters. Distances below it are floored to it.
    pub ref_dist_m: f64,
    /// Path-loss exponent.
    pub exponent: f64,
    /// Log-normal shadowing standard deviation, dB. 0 disables shadowing.
    pub shadowing_sigma_db: f64,
}

impl Default for PlParams {
    /// Standard indoor values: 40 dB at 1 m, exponent 3, no shadowing.
    fn default() -> Self {
        Self {
            pl0_db: 40.0,
            ref_dist_m: 1.0,
            exponent: 3.0,
            shadowing_sigma_db: 0.0,
        }
    }
}

impl PlParams {
    pub fn with_shadowing(sigma_db: f64) -> Self {
        Self {
            shadowing_sigma_db: sigma_db,
            ..Self::default()
        }
    }
}

/// Deterministic log-distance path loss in dB at `d_m` meters:
/// `pl0 + 10·n·log10(max(d, ref_dist)/ref_dist)`. Shadowing is added by the
/// generators on top of this.
pub fn pathloss(d_m: f64, params: &PlParams) -> f64 {
    debug_assert!(d_m >= 0.0, "negative distance");
    params.pl0_db
        + 10.0 * params.exponent * (d_m.max(params.ref_dist_m) / params.ref_dist_m).log10()
}

/// Hotspot layout of the station population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotspotParams {
    pub n_hotspots: usize,
    /// Share of stations drawn around a hotspot center; the rest are uniform.
    pub clustered_fraction: f64,
    /// Per-axis Gaussian spread of a cluster, meters.
    pub cluster_sigma_m: f64,
}

impl Default for HotspotParams {
    fn default() -> Self {
        Self {
            n_hotspots: 50,
            clustered_fraction: 0.9,
            cluster_sigma_m: 2.0,
        }
    }
}

/// A generated deployment: positions, the derived network instance and the
/// complete ground-truth station × AP path-loss map.
#[derive(Debug, Clone)]
pub struct SyntheticScenario {
    pub side_m: f64,
    pub pl_params: PlParams,
    pub ap_positions: Vec<[f64; 2]>,
    pub sta_positions: Vec<[f64; 2]>,
    /// Empty unless generated with hotspots.
    pub hotspot_centers: Vec<[f64; 2]>,
    /// Per-station provenance: true when drawn around a hotspot center.
    pub sta_clustered: Vec<bool>,
    pub instance: NetworkInstance,
    /// Complete station × AP path loss; row origin ids are the station ids.
    pub ground_truth: ReferencePointSet,
}

/// Independent per-component random stream: FNV-1a of the label folded into
/// the seed, so adding a component never shifts the others' draws.
fn sub_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// APs and stations i.i.d. uniform on the square. All APs share channel 36
/// unless `channels` gives a plan (applied cyclically).
pub fn gen_uniform_scenario(
    n_aps: usize,
    n_stas: usize,
    side_m: f64,
    levels: &[i32],
    channels: Option<&[u32]>,
    pl_params: &PlParams,
    seed: u64,
) -> SyntheticScenario {
    gen_scenario(n_aps, n_stas, side_m, levels, channels, pl_params, None, seed)
}

/// Station population split between tight Gaussian clusters around uniform
/// hotspot centers and a uniform remainder.
pub fn gen_hotspot_scenario(
    n_aps: usize,
    n_stas: usize,
    side_m: f64,
    levels: &[i32],
    channels: Option<&[u32]>,
    pl_params: &PlParams,
    hotspots: &HotspotParams,
    seed: u64,
) -> SyntheticScenario {
    gen_scenario(
        n_aps,
        n_stas,
        side_m,
        levels,
        channels,
        pl_params,
        Some(hotspots),
        seed,
    )
}

fn gen_scenario(
    n_aps: usize,
    n_stas: usize,
    side_m: f64,
    levels: &[i32],
    channels: Option<&[u32]>,
    pl_params: &PlParams,
    hotspots: Option<&HotspotParams>,
    seed: u64,
) -> SyntheticScenario {
    assert!(n_aps >= 1, "need at least one AP");
    assert!(n_stas >= 1, "need at least one station");
    assert!(side_m > 0.0, "square side must be positive");
    assert!(!levels.is_empty(), "empty allowed-level set");
    if let Some(h) = hotspots {
        assert!(
            (0.0..=1.0).contains(&h.clustered_fraction),
            "clustered_fraction outside [0, 1]"
        );
    }

    let mut rng_ap = sub_rng(seed, "ap-pos");
    let ap_positions: Vec<[f64; 2]> = (0..n_aps)
        .map(|_| [rng_ap.random_range(0.0..side_m), rng_ap.random_range(0.0..side_m)])
        .collect();

    let hotspot_centers: Vec<[f64; 2]> = match hotspots {
        Some(h) => {
            let mut rng = sub_rng(seed, "hotspot-centers");
            (0..h.n_hotspots)
                .map(|_| [rng.random_range(0.0..side_m), rng.random_range(0.0..side_m)])
                .collect()
        }
        None => Vec::new(),
    };

    let mut rng_sta = sub_rng(seed, "sta-pos");
    let mut rng_coin = sub_rng(seed, "sta-coin");
    let mut rng_cluster = sub_rng(seed, "cluster-offsets");
    let mut sta_positions = Vec::with_capacity(n_stas);
    let mut sta_clustered = Vec::with_capacity(n_stas);
    for _ in 0..n_stas {
        let clustered = match hotspots {
            Some(h) if !hotspot_centers.is_empty() => {
                rng_coin.random_range(0.0..1.0) < h.clustered_fraction
            }
            _ => false,
        };
        if clustered {
            let h = hotspots.expect("clustered implies hotspot params");
            let center = hotspot_centers[rng_cluster.random_range(0..hotspot_centers.len())];
            let mut p = center;
            if h.cluster_sigma_m > 0.0 {
                let normal = Normal::new(0.0, h.cluster_sigma_m).expect("finite sigma");
                p[0] += normal.sample(&mut rng_cluster);
                p[1] += normal.sample(&mut rng_cluster);
            }
            sta_positions.push([p[0].clamp(0.0, side_m), p[1].clamp(0.0, side_m)]);
        } else {
            sta_positions.push([
                rng_sta.random_range(0.0..side_m),
                rng_sta.random_range(0.0..side_m),
            ]);
        }
        sta_clustered.push(clustered);
    }

    let aps: Vec<AccessPoint> = (0..n_aps)
        .map(|i| {
            let channel = channels.map_or(36, |plan| plan[i % plan.len()]);
            AccessPoint::new(format!("ap{i}"), levels.to_vec(), channel)
        })
        .collect();

    let sigma = pl_params.shadowing_sigma_db;
    let shadow = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma"));

    // AP-AP attenuation: one shadowing draw per unordered pair keeps the
    // directed readings symmetric, so instance ingestion averages no-ops.
    let mut rng_noise = sub_rng(seed, "appl-noise");
    let mut directed = vec![vec![None; n_aps]; n_aps];
    for i in 0..n_aps {
        for j in (i + 1)..n_aps {
            let mut pl = pathloss(dist(ap_positions[i], ap_positions[j]), pl_params);
            if let Some(n) = &shadow {
                pl += n.sample(&mut rng_noise);
            }
            let pl = pl.max(0.0);
            directed[i][j] = Some(pl);
            directed[j][i] = Some(pl);
        }
    }
    let instance = NetworkInstance::new(aps, &directed, None).expect("generated topology is valid");

    let mut rng_noise = sub_rng(seed, "rppl-noise");
    let rows: Vec<Vec<f64>> = sta_positions
        .iter()
        .map(|&sta| {
            ap_positions
                .iter()
                .map(|&ap| {
                    let mut pl = pathloss(dist(sta, ap), pl_params);
                    if let Some(n) = &shadow {
                        pl += n.sample(&mut rng_noise);
                    }
                    pl.max(0.0)
                })
                .collect()
        })
        .collect();
    let origin_ids = (0..n_stas).map(|i| format!("sta{i}")).collect();
    let ground_truth =
        ReferencePointSet::new(DenseMatrix::from_rows(rows), origin_ids, n_aps)
            .expect("generated map is complete");

    SyntheticScenario {
        side_m,
        pl_params: *pl_params,
        ap_positions,
        sta_positions,
        hotspot_centers,
        sta_clustered,
        instance,
        ground_truth,
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Reduces a complete path-loss map to per-station partial reports that keep
/// only the `k_visible` nearest (smallest-PL) APs, ties broken by AP index.
/// The serving AP is the nearest one, so it always survives.
pub fn obfuscate(
    ground_truth: &ReferencePointSet,
    instance: &NetworkInstance,
    k_visible: usize,
) -> Vec<MeasurementRecord> {
    assert!(
        k_visible >= 1 && k_visible <= instance.n_aps(),
        "k_visible must be in 1..=n_aps"
    );
    assert_eq!(ground_truth.n_aps(), instance.n_aps());
    let ids = instance.ap_ids();
    (0..ground_truth.len())
        .map(|rp| {
            let row = ground_truth.row(rp);
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&a, &b| row[a].partial_cmp(&row[b]).expect("finite PL").then(a.cmp(&b)));
            let kept: BTreeMap<String, f64> = order[..k_visible]
                .iter()
                .map(|&a| (ids[a].clone(), row[a]))
                .collect();
            MeasurementRecord {
                ts: rp as i64,
                sta_id: ground_truth.origin_ids()[rp].clone(),
                serving_ap: ids[order[0]].clone(),
                pl: kept,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::quantile;
    use approx::assert_relative_eq;

    const LEVELS: [i32; 8] = [4, 8, 12, 16, 20, 24, 28, 32];

    #[test]
    fn log_distance_fixed_points() {
        let p = PlParams::default();
        assert_eq!(pathloss(1.0, &p), 40.0);
        assert_relative_eq!(pathloss(10.0, &p), 70.0, max_relative = 1e-12);
        assert_relative_eq!(pathloss(100.0, &p), 100.0, max_relative = 1e-12);
        // sub-reference distances floor at the reference
        assert_eq!(pathloss(0.1, &p), 40.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let p = PlParams::with_shadowing(5.0);
        let a = gen_uniform_scenario(5, 20, 50.0, &LEVELS, None, &p, 42);
        let b = gen_uniform_scenario(5, 20, 50.0, &LEVELS, None, &p, 42);
        assert_eq!(a.ap_positions, b.ap_positions);
        assert_eq!(a.sta_positions, b.sta_positions);
        assert_eq!(a.ground_truth, b.ground_truth);
        assert_eq!(a.instance.ap_pl(), b.instance.ap_pl());
        let c = gen_uniform_scenario(5, 20, 50.0, &LEVELS, None, &p, 43);
        assert_ne!(a.sta_positions, c.sta_positions);
    }

    #[test]
    fn single_ap_topology_is_zero_matrix() {
        let s = gen_uniform_scenario(1, 3, 50.0, &LEVELS, None, &PlParams::default(), 1);
        assert_eq!(s.instance.ap_pl().rows(), 1);
        assert_eq!(s.instance.pl_between(0, 0), 0.0);
    }

    #[test]
    fn stored_pls_regenerate_from_positions_without_shadowing() {
        let p = PlParams::default();
        let s = gen_uniform_scenario(33, 330, 100.0, &LEVELS, None, &p, 7);
        for rp in 0..s.ground_truth.len() {
            for a in 0..33 {
                let d = dist(s.sta_positions[rp], s.ap_positions[a]);
                assert_eq!(s.ground_truth.row(rp)[a], pathloss(d, &p));
            }
        }
        for i in 0..33 {
            for j in (i + 1)..33 {
                let d = dist(s.ap_positions[i], s.ap_positions[j]);
                assert_eq!(s.instance.pl_between(i, j), pathloss(d, &p));
            }
        }
        // quartiles of the stored map match the distance quartiles mapped
        // through the propagation model
        let pls: Vec<f64> = s.ground_truth.matrix().as_slice().to_vec();
        let dists: Vec<f64> = s
            .sta_positions
            .iter()
            .flat_map(|&sta| s.ap_positions.iter().map(move |&ap| dist(sta, ap)))
            .collect();
        for q in [0.25, 0.5, 0.75] {
            let dq = quantile(&dists, q).unwrap();
            assert_relative_eq!(
                quantile(&pls, q).unwrap(),
                pathloss(dq, &p),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn ap_ap_shadowing_is_symmetric() {
        let p = PlParams::with_shadowing(5.0);
        let s = gen_uniform_scenario(6, 2, 50.0, &LEVELS, None, &p, 9);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(s.instance.pl_between(i, j), s.instance.pl_between(j, i));
            }
        }
    }

    #[test]
    fn zero_clustered_fraction_reduces_to_uniform_placement() {
        let p = PlParams::default();
        let hs = HotspotParams {
            n_hotspots: 50,
            clustered_fraction: 0.0,
            cluster_sigma_m: 2.0,
        };
        let hot = gen_hotspot_scenario(4, 100, 100.0, &LEVELS, None, &p, &hs, 5);
        let uni = gen_uniform_scenario(4, 100, 100.0, &LEVELS, None, &p, 5);
        assert_eq!(hot.sta_positions, uni.sta_positions);
        assert!(hot.sta_clustered.iter().all(|c| !c));
    }

    #[test]
    fn degenerate_clusters_collapse_onto_centers() {
        let hs = HotspotParams {
            n_hotspots: 3,
            clustered_fraction: 1.0,
            cluster_sigma_m: 0.0,
        };
        let s = gen_hotspot_scenario(4, 60, 100.0, &LEVELS, None, &PlParams::default(), &hs, 11);
        for &pos in &s.sta_positions {
            assert!(s.hotspot_centers.iter().any(|&c| c == pos));
        }
        assert!(s.sta_clustered.iter().all(|&c| c));
    }

    #[test]
    fn default_hotspots_keep_stations_near_centers() {
        let hs = HotspotParams::default();
        let s = gen_hotspot_scenario(
            10,
            10_000,
            100.0,
            &LEVELS,
            None,
            &PlParams::default(),
            &hs,
            13,
        );
        let near = s
            .sta_positions
            .iter()
            .filter(|&&p| {
                s.hotspot_centers
                    .iter()
                    .any(|&c| dist(p, c) <= 3.0 * hs.cluster_sigma_m)
            })
            .count();
        assert!(
            near as f64 >= 0.85 * s.sta_positions.len() as f64,
            "only {near} of {} stations near a hotspot",
            s.sta_positions.len()
        );
    }

    #[test]
    fn obfuscation_keeps_nearest_aps() {
        let s = gen_uniform_scenario(4, 6, 80.0, &LEVELS, None, &PlParams::default(), 3);

        // full visibility: identity on values
        let full = obfuscate(&s.ground_truth, &s.instance, 4);
        assert_eq!(full.len(), 6);
        for (rp, rec) in full.iter().enumerate() {
            assert_eq!(rec.visible_count(), 4);
            for (a, id) in s.instance.ap_ids().iter().enumerate() {
                assert_eq!(rec.pl[id], s.ground_truth.row(rp)[a]);
            }
        }

        // k = 1 keeps exactly the serving (nearest) AP
        let one = obfuscate(&s.ground_truth, &s.instance, 1);
        for rec in &one {
            assert_eq!(rec.visible_count(), 1);
            assert!(rec.pl.contains_key(&rec.serving_ap));
        }

        // hand row: PLs 50/60/70/80 with k = 2 keeps the 50 and 60 entries
        let rps = ReferencePointSet::new(
            DenseMatrix::from_rows(vec![vec![70.0, 50.0, 80.0, 60.0]]),
            vec!["r0".into()],
            4,
        )
        .unwrap();
        let recs = obfuscate(&rps, &s.instance, 2);
        assert_eq!(recs[0].serving_ap, "ap1");
        assert_eq!(
            recs[0].pl,
            BTreeMap::from([("ap1".into(), 50.0), ("ap3".into(), 60.0)])
        );
    }

    #[test]
    fn obfuscation_never_drops_serving() {
        let p = PlParams::with_shadowing(5.0);
        let s = gen_uniform_scenario(8, 40, 100.0, &LEVELS, None, &p, 21);
        for k in 1..=8 {
            for rec in obfuscate(&s.ground_truth, &s.instance, k) {
                assert_eq!(rec.visible_count(), k);
                assert!(rec.violation().is_none(), "{:?}", rec.violation());
            }
        }
    }
}
