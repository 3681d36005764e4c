//! Reference-point downsampling: density-preserving uniform selection and
//! coverage-friendly stratified selection on a 3-D embedding (PCA or exact
//! t-SNE) with k-d-tree radius pruning.

pub mod kdtree;
pub mod pca;
pub mod tsne;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kdtree::KdTree;
pub use pca::{pca_project, pca_project_detail, PcaDetail};
pub use tsne::{tsne_project, TsneOutput, TSNE_EXACT_CAP};

use crate::stats::quantile;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("projection dimension {0} unsupported (1..=3)")]
    BadDims(usize),
    #[error("need at least {need} rows, got {rows}")]
    TooFewRows { rows: usize, need: usize },
    #[error("{points} points exceed the exact-method cap of {cap}")]
    TooManyPoints { points: usize, cap: usize },
    #[error("perplexity {perplexity} too large for {points} points (must be < (N-1)/3)")]
    PerplexityTooLarge { perplexity: f64, points: usize },
    #[error("cannot select {k} of {n} points")]
    SampleTooLarge { k: usize, n: usize },
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("need at least 2 points for pairwise distances")]
    NoPairs,
}

/// 3-D latent coordinates of the input rows, tagged with how they were made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub coords: Vec<[f64; 3]>,
    pub method: ProjectionMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ProjectionMethod {
    Pca {
        dims: usize,
    },
    Tsne {
        perplexity: f64,
        iterations: usize,
        seed: u64,
    },
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Uniform,
    Stratified,
}

/// Chosen point indices plus the parameters that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Ascending, unique, within the source point range.
    pub selected: Vec<usize>,
    /// The pruning radius (stratified only).
    pub radius: Option<f64>,
    pub method: SelectionMethod,
    pub seed: u64,
}

/// `k` distinct indices drawn uniformly without replacement from
/// `0..n_total`. Preserves whatever density structure the population has.
pub fn uniform_select(n_total: usize, k: usize, seed: u64) -> Result<SelectionResult, SelectionError> {
    if k > n_total {
        return Err(SelectionError::SampleTooLarge { k, n: n_total });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = rand::seq::index::sample(&mut rng, n_total, k).into_vec();
    selected.sort_unstable();
    Ok(SelectionResult {
        selected,
        radius: None,
        method: SelectionMethod::Uniform,
        seed,
    })
}

/// Radius-pruned selection: walk a seeded random permutation; every point
/// not yet claimed becomes selected and claims everything within `r` of it.
///
/// By construction, selected points are pairwise farther than `r` apart,
/// every unselected point lies within `r` of a selected one, and the two
/// sets partition the input.
pub fn stratified_select(
    embedding: &Embedding,
    r: f64,
    seed: u64,
) -> Result<SelectionResult, SelectionError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(SelectionError::BadRadius(r));
    }
    let n = embedding.len();
    let tree = KdTree::build(&embedding.coords);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut claimed = vec![false; n];
    let mut selected = Vec::new();
    for &p in &order {
        if claimed[p] {
            continue;
        }
        selected.push(p);
        for q in tree.within_radius(embedding.coords[p], r) {
            claimed[q] = true; // includes p itself (distance 0)
        }
    }
    selected.sort_unstable();
    Ok(SelectionResult {
        selected,
        radius: Some(r),
        method: SelectionMethod::Stratified,
        seed,
    })
}

/// For every point, how many *other* points lie within distance `r`
/// (boundary inclusive).
pub fn neighbor_counts(embedding: &Embedding, r: f64) -> Result<Vec<usize>, SelectionError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(SelectionError::BadRadius(r));
    }
    let tree = KdTree::build(&embedding.coords);
    Ok(embedding
        .coords
        .iter()
        .map(|&p| tree.within_radius(p, r).len() - 1)
        .collect())
}

/// Share of `selected` points that are isolated, where isolated means a
/// neighbor count strictly below the 10th percentile of all points' counts.
pub fn isolated_fraction(counts: &[usize], selected: &[usize]) -> f64 {
    if selected.is_empty() {
        return 0.0;
    }
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let threshold = quantile(&as_f64, 0.10).expect("non-empty counts");
    let isolated = selected
        .iter()
        .filter(|&&i| (counts[i] as f64) < threshold)
        .count();
    isolated as f64 / selected.len() as f64
}

/// Quantile of the pairwise-distance distribution of the embedding, for
/// mapping a scale-free radius fraction onto this embedding's units. Exact
/// for small inputs; seeded pair sampling beyond `PAIR_SAMPLE_CAP` pairs.
pub fn distance_quantile(
    embedding: &Embedding,
    q: f64,
    seed: u64,
) -> Result<f64, SelectionError> {
    const PAIR_SAMPLE_CAP: usize = 200_000;
    let n = embedding.len();
    if n < 2 {
        return Err(SelectionError::NoPairs);
    }
    let total_pairs = n * (n - 1) / 2;
    let mut dists = Vec::with_capacity(total_pairs.min(PAIR_SAMPLE_CAP));
    if total_pairs <= PAIR_SAMPLE_CAP {
        for i in 0..n {
            for j in (i + 1)..n {
                dists.push(dist3(embedding.coords[i], embedding.coords[j]));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..PAIR_SAMPLE_CAP {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            dists.push(dist3(embedding.coords[i], embedding.coords[j]));
        }
    }
    Ok(quantile(&dists, q).expect("non-empty distances"))
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}
