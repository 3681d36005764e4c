//! Selection behavior on clustered user populations: the radius sweep
//! shrinks the stratified selection monotonically, and stratified selection
//! over-represents sparse regions relative to uniform selection.

use uatpc::selection::{
    distance_quantile, isolated_fraction, neighbor_counts, pca_project, stratified_select,
    uniform_select,
};
use uatpc::synth::{gen_hotspot_scenario, HotspotParams, PlParams};

const LEVELS: [i32; 4] = [4, 12, 20, 28];

#[test]
fn stratified_count_decreases_over_radius_sweep() {
    let scenario = gen_hotspot_scenario(
        20,
        4000,
        150.0,
        &LEVELS,
        None,
        &PlParams::default(),
        &HotspotParams {
            n_hotspots: 50,
            clustered_fraction: 0.9,
            cluster_sigma_m: 2.0,
        },
        5,
    );
    let embedding = pca_project(scenario.ground_truth.matrix(), 3).unwrap();
    // radii scaled to the embedding's own span via distance quantiles
    let scale = distance_quantile(&embedding, 0.99, 1).unwrap();
    let radii = [0.05, 0.1, 0.2, 0.4].map(|f| f * scale);
    let mut counts = Vec::new();
    for r in radii {
        counts.push(stratified_select(&embedding, r, 33).unwrap().selected.len());
    }
    for pair in counts.windows(2) {
        assert!(
            pair[0] > pair[1],
            "selected counts not decreasing over the radius sweep: {counts:?}"
        );
    }
}

#[test]
fn stratified_selection_lands_in_sparse_regions_more_than_uniform() {
    let scenario = gen_hotspot_scenario(
        20,
        5000,
        150.0,
        &LEVELS,
        None,
        &PlParams::default(),
        &HotspotParams::default(),
        6,
    );
    let embedding = pca_project(scenario.ground_truth.matrix(), 3).unwrap();
    let r = distance_quantile(&embedding, 0.99, 2).unwrap() * 0.05;
    let stratified = stratified_select(&embedding, r, 17).unwrap();
    let uniform = uniform_select(embedding.len(), stratified.selected.len(), 17).unwrap();

    let counts = neighbor_counts(&embedding, r).unwrap();
    let strat_isolated = isolated_fraction(&counts, &stratified.selected);
    let unif_isolated = isolated_fraction(&counts, &uniform.selected);
    assert!(
        strat_isolated >= 2.0 * unif_isolated,
        "stratified isolated fraction {strat_isolated:.3} not ≥ 2× uniform {unif_isolated:.3}"
    );

    // uniform selection preserves the population's hotspot share
    let clustered = uniform
        .selected
        .iter()
        .filter(|&&i| scenario.sta_clustered[i])
        .count() as f64
        / uniform.selected.len() as f64;
    assert!(
        (clustered - 0.9).abs() <= 0.05,
        "uniform hotspot share {clustered:.3} strays from the population's 0.9"
    );
}
