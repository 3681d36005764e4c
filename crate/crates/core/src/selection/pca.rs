//! Principal-component projection of complete path-loss rows into the 3-D
//! latent space used by the coverage-friendly selector.

use nalgebra::{DMatrix, DVector};

use crate::model::DenseMatrix;

use super::{Embedding, ProjectionMethod, SelectionError};

/// Eigenvalues at or below this share of the largest are treated as
/// numerically zero (rank deficiency) and their coordinates zero-padded.
const RANK_TOL: f64 = 1e-10;

/// Output of the eigendecomposition behind [`pca_project`], exposed for
/// diagnostics: eigenvalues are sorted descending, `projected_dims` says how
/// many coordinates carry signal (the rest are zero-padded).
pub struct PcaDetail {
    pub embedding: Embedding,
    pub eigenvalues: Vec<f64>,
    pub projected_dims: usize,
}

/// Mean-centered projection onto the top `dims` (≤ 3) principal directions
/// of the sample covariance. Deterministic: each kept direction is oriented
/// so its largest-magnitude loading is positive; directions with
/// numerically zero variance contribute zero coordinates.
pub fn pca_project(matrix: &DenseMatrix, dims: usize) -> Result<Embedding, SelectionError> {
    Ok(pca_project_detail(matrix, dims)?.embedding)
}

pub fn pca_project_detail(
    matrix: &DenseMatrix,
    dims: usize,
) -> Result<PcaDetail, SelectionError> {
    if dims == 0 || dims > 3 {
        return Err(SelectionError::BadDims(dims));
    }
    let n = matrix.rows();
    let d = matrix.cols();
    if n < dims {
        return Err(SelectionError::TooFewRows { rows: n, need: dims });
    }

    let means: Vec<f64> = (0..d)
        .map(|c| (0..n).map(|r| matrix.get(r, c)).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, d, |r, c| matrix.get(r, c) - means[c]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0).max(1.0);

    let eigen = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let scale = eigenvalues.first().copied().unwrap_or(0.0).max(1.0);

    let mut coords = vec![[0.0f64; 3]; n];
    let mut projected_dims = 0;
    for out in 0..dims.min(d) {
        if eigenvalues[out] <= RANK_TOL * scale {
            break; // numerically zero variance: leave the coordinate at 0
        }
        projected_dims = out + 1;
        let mut v: DVector<f64> = eigen.eigenvectors.column(order[out]).into_owned();
        let dominant = v
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).expect("finite"))
            .map(|(i, _)| i)
            .expect("non-empty eigenvector");
        if v[dominant] < 0.0 {
            v.neg_mut();
        }
        let projected = &centered * &v;
        for (r, c) in coords.iter_mut().enumerate() {
            c[out] = projected[r];
        }
    }

    Ok(PcaDetail {
        embedding: Embedding {
            coords,
            method: ProjectionMethod::Pca { dims },
        },
        eigenvalues,
        projected_dims,
    })
}
