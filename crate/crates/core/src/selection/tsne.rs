//! Exact (quadratic) t-SNE into 3-D, PCA-initialized, for desk-scale
//! embedding of path-loss rows. Deliberately not Barnes–Hut: point counts
//! here stay small enough that exactness beats speed.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::model::DenseMatrix;

use super::pca::pca_project;
use super::{Embedding, ProjectionMethod, SelectionError};

/// Hard cap on the exact method's input size (pairwise matrices are dense).
pub const TSNE_EXACT_CAP: usize = 10_000;

const LEARNING_RATE: f64 = 200.0;
const EARLY_EXAGGERATION: f64 = 12.0;
const MOMENTUM_SWITCH_ITER: usize = 250;
const INITIAL_MOMENTUM: f64 = 0.5;
const FINAL_MOMENTUM: f64 = 0.8;
const MIN_GAIN: f64 = 0.01;
const P_FLOOR: f64 = 1e-12;

/// Embedding plus the KL divergence of the affinity fit before the first
/// and after the last gradient step (both against the un-exaggerated
/// affinities, so they are comparable).
pub struct TsneOutput {
    pub embedding: Embedding,
    pub initial_kl: f64,
    pub final_kl: f64,
}

/// Projects complete rows into 3-D with exact t-SNE.
///
/// Affinity bandwidths are fit per point by binary search to the target
/// perplexity; the embedding starts from the PCA projection (rescaled to a
/// tiny spread, with seeded sub-spread jitter) and descends the KL
/// objective with the standard momentum-plus-gains schedule and an early
/// exaggeration phase.
pub fn tsne_project(
    matrix: &DenseMatrix,
    perplexity: f64,
    iterations: usize,
    seed: u64,
) -> Result<TsneOutput, SelectionError> {
    tsne_project_with_cap(matrix, perplexity, iterations, seed, TSNE_EXACT_CAP)
}

fn tsne_project_with_cap(
    matrix: &DenseMatrix,
    perplexity: f64,
    iterations: usize,
    seed: u64,
    cap: usize,
) -> Result<TsneOutput, SelectionError> {
    let n = matrix.rows();
    if n > cap {
        return Err(SelectionError::TooManyPoints { points: n, cap });
    }
    if n < 4 {
        return Err(SelectionError::TooFewRows { rows: n, need: 4 });
    }
    if !(perplexity > 0.0) || perplexity >= (n as f64 - 1.0) / 3.0 {
        return Err(SelectionError::PerplexityTooLarge {
            perplexity,
            points: n,
        });
    }

    let p = symmetric_affinities(matrix, perplexity);

    // PCA init, rescaled so the leading coordinate's spread is 1e-4, plus
    // even smaller seeded jitter so exactly duplicated rows can separate.
    let init = pca_project(matrix, 3)?;
    let mut y: Vec<[f64; 3]> = init.coords;
    let lead_std = {
        let mean = y.iter().map(|c| c[0]).sum::<f64>() / n as f64;
        (y.iter().map(|c| (c[0] - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let scale = if lead_std > 0.0 { 1e-4 / lead_std } else { 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 1e-6).expect("fixed sigma");
    for c in &mut y {
        for k in 0..3 {
            c[k] = c[k] * scale + jitter.sample(&mut rng);
        }
    }

    let mut velocity = vec![[0.0f64; 3]; n];
    let mut gains = vec![[1.0f64; 3]; n];
    let mut grad = vec![[0.0f64; 3]; n];
    let mut q_num = vec![0.0f64; n * n];

    let ee_iters = MOMENTUM_SWITCH_ITER.min(iterations / 4);
    let mut initial_kl = f64::NAN;

    for iter in 0..iterations.max(1) {
        // student-t kernel numerators and their total
        let mut q_total = 0.0;
        for i in 0..n {
            q_num[i * n + i] = 0.0;
            for j in (i + 1)..n {
                let d2: f64 = (0..3).map(|k| (y[i][k] - y[j][k]).powi(2)).sum();
                let v = 1.0 / (1.0 + d2);
                q_num[i * n + j] = v;
                q_num[j * n + i] = v;
                q_total += 2.0 * v;
            }
        }
        let q_total = q_total.max(f64::MIN_POSITIVE);

        if iter == 0 {
            initial_kl = kl_divergence(&p, &q_num, q_total, n);
        }

        let exaggeration = if iter < ee_iters { EARLY_EXAGGERATION } else { 1.0 };
        for g in &mut grad {
            *g = [0.0; 3];
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let num = q_num[i * n + j];
                let q = (num / q_total).max(P_FLOOR);
                let coeff = 4.0 * (exaggeration * p[i * n + j] - q) * num;
                for k in 0..3 {
                    let d = (y[i][k] - y[j][k]) * coeff;
                    grad[i][k] += d;
                    grad[j][k] -= d;
                }
            }
        }

        let momentum = if iter < MOMENTUM_SWITCH_ITER {
            INITIAL_MOMENTUM
        } else {
            FINAL_MOMENTUM
        };
        for i in 0..n {
            for k in 0..3 {
                let g = grad[i][k];
                gains[i][k] = if (g > 0.0) != (velocity[i][k] > 0.0) {
                    gains[i][k] + 0.2
                } else {
                    (gains[i][k] * 0.8).max(MIN_GAIN)
                };
                velocity[i][k] = momentum * velocity[i][k] - LEARNING_RATE * gains[i][k] * g;
                y[i][k] += velocity[i][k];
            }
        }
        // keep the embedding centered so it cannot drift
        for k in 0..3 {
            let mean = y.iter().map(|c| c[k]).sum::<f64>() / n as f64;
            for c in &mut y {
                c[k] -= mean;
            }
        }
    }

    // final fit quality on the post-update embedding
    let mut q_total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = (0..3).map(|k| (y[i][k] - y[j][k]).powi(2)).sum();
            let v = 1.0 / (1.0 + d2);
            q_num[i * n + j] = v;
            q_num[j * n + i] = v;
            q_total += 2.0 * v;
        }
    }
    let final_kl = kl_divergence(&p, &q_num, q_total.max(f64::MIN_POSITIVE), n);

    Ok(TsneOutput {
        embedding: Embedding {
            coords: y,
            method: ProjectionMethod::Tsne {
                perplexity,
                iterations,
                seed,
            },
        },
        initial_kl,
        final_kl,
    })
}

/// Symmetrized, normalized affinities with per-point bandwidths fit by
/// binary search so each row's conditional distribution hits the target
/// perplexity (entropy = ln perplexity).
fn symmetric_affinities(matrix: &DenseMatrix, perplexity: f64) -> Vec<f64> {
    let n = matrix.rows();
    let d = matrix.cols();
    let mut sq = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = matrix.row(i);
            let b = matrix.row(j);
            let d2: f64 = (0..d).map(|k| (a[k] - b[k]).powi(2)).sum();
            sq[i * n + j] = d2;
            sq[j * n + i] = d2;
        }
    }

    let target_entropy = perplexity.ln();
    let mut cond = vec![0.0f64; n * n];
    let mut row = vec![0.0f64; n];
    for i in 0..n {
        let mut beta = 1.0;
        let mut beta_min = f64::NEG_INFINITY;
        let mut beta_max = f64::INFINITY;
        for _ in 0..50 {
            let mut sum_p = 0.0;
            let mut sum_dp = 0.0;
            for j in 0..n {
                let v = if j == i {
                    0.0
                } else {
                    (-sq[i * n + j] * beta).exp()
                };
                row[j] = v;
                sum_p += v;
                sum_dp += sq[i * n + j] * v;
            }
            let sum_p = sum_p.max(f64::MIN_POSITIVE);
            let entropy = sum_p.ln() + beta * sum_dp / sum_p;
            let diff = entropy - target_entropy;
            if diff.abs() < 1e-5 {
                break;
            }
            if diff > 0.0 {
                beta_min = beta;
                beta = if beta_max.is_finite() {
                    (beta + beta_max) / 2.0
                } else {
                    beta * 2.0
                };
            } else {
                beta_max = beta;
                beta = if beta_min.is_finite() {
                    (beta + beta_min) / 2.0
                } else {
                    beta / 2.0
                };
            }
        }
        let sum_p: f64 = row.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        for j in 0..n {
            cond[i * n + j] = row[j] / sum_p;
        }
    }

    let mut p = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] =
                    ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(P_FLOOR);
            }
        }
    }
    p
}

fn kl_divergence(p: &[f64], q_num: &[f64], q_total: f64, n: usize) -> f64 {
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let pij = p[i * n + j];
            let qij = (q_num[i * n + j] / q_total).max(P_FLOOR);
            kl += pij * (pij / qij).ln();
        }
    }
    kl
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    /// Two 6-D Gaussian blobs, far apart relative to their spread.
    fn blob_matrix(per_blob: usize, seed: u64) -> (DenseMatrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = [[50.0; 6], [95.0; 6]];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (b, center) in centers.iter().enumerate() {
            for _ in 0..per_blob {
                rows.push(center.iter().map(|c| c + rng.random_range(-3.0..3.0)).collect());
                labels.push(b);
            }
        }
        (DenseMatrix::from_rows(rows), labels)
    }

    /// Plain 2-means with deterministic farthest-pair initialization.
    fn two_means(points: &[[f64; 3]]) -> Vec<usize> {
        let mut best = (0, 1, 0.0);
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d: f64 = (0..3).map(|k| (points[i][k] - points[j][k]).powi(2)).sum();
                if d > best.2 {
                    best = (i, j, d);
                }
            }
        }
        let mut centers = [points[best.0], points[best.1]];
        let mut assign = vec![0usize; points.len()];
        for _ in 0..25 {
            for (i, p) in points.iter().enumerate() {
                let d0: f64 = (0..3).map(|k| (p[k] - centers[0][k]).powi(2)).sum();
                let d1: f64 = (0..3).map(|k| (p[k] - centers[1][k]).powi(2)).sum();
                assign[i] = usize::from(d1 < d0);
            }
            for c in 0..2 {
                let members: Vec<&[f64; 3]> =
                    points.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
                if members.is_empty() {
                    continue;
                }
                for k in 0..3 {
                    centers[c][k] =
                        members.iter().map(|p| p[k]).sum::<f64>() / members.len() as f64;
                }
            }
        }
        assign
    }

    #[test]
    fn rejects_oversized_and_degenerate_inputs() {
        let (m, _) = blob_matrix(25, 1);
        assert!(matches!(
            tsne_project(&m, 40.0, 100, 0),
            Err(SelectionError::PerplexityTooLarge { .. })
        ));
        assert!(matches!(
            tsne_project_with_cap(&m, 10.0, 100, 0, 20),
            Err(SelectionError::TooManyPoints { points: 50, cap: 20 })
        ));
        let tiny = DenseMatrix::from_rows(vec![vec![1.0, 2.0]; 3]);
        assert!(matches!(
            tsne_project(&tiny, 0.5, 10, 0),
            Err(SelectionError::TooFewRows { .. })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let (m, _) = blob_matrix(20, 3);
        let a = tsne_project(&m, 8.0, 60, 11).unwrap();
        let b = tsne_project(&m, 8.0, 60, 11).unwrap();
        assert_eq!(a.embedding.coords, b.embedding.coords);
        assert_eq!(a.final_kl, b.final_kl);
        let c = tsne_project(&m, 8.0, 60, 12).unwrap();
        assert_ne!(a.embedding.coords, c.embedding.coords);
    }

    #[test]
    fn fit_improves_over_initialization() {
        let (m, _) = blob_matrix(40, 5);
        let out = tsne_project(&m, 12.0, 300, 7).unwrap();
        assert!(
            out.final_kl < out.initial_kl,
            "final KL {} not below initial {}",
            out.final_kl,
            out.initial_kl
        );
        assert!(out.final_kl.is_finite());
    }

    #[test]
    fn separates_well_separated_blobs() {
        let (m, labels) = blob_matrix(60, 9);
        let out = tsne_project(&m, 15.0, 350, 13).unwrap();
        let assign = two_means(&out.embedding.coords);
        let agree = assign.iter().zip(&labels).filter(|(a, b)| a == b).count();
        let purity = agree.max(labels.len() - agree) as f64 / labels.len() as f64;
        assert!(purity >= 0.95, "blob purity {purity}");
    }
}
