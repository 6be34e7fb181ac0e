//! Similarity network fusion: per-view scaled-exponential affinities fused by
//! cross-view diffusion, then clustered spectrally.

use crate::assignment::ClusterAssignment;
use crate::distance::{pairwise_distances, Metric};
use crate::error::{Error, Result};
use crate::ingest::ViewSet;
use crate::matrix::{Matrix, SymmetricMatrix};
use crate::spectral::spectral;

/// SNF hyperparameters; the defaults are the method's published ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnfParams {
    pub k_neighbors: usize,
    pub mu: f64,
    pub iterations: usize,
}

impl SnfParams {
    /// Defaults scaled to the cohort size: `k = max(3, round(n/10))`,
    /// `mu = 0.5`, 20 diffusion steps.
    pub fn defaults_for(n_samples: usize) -> Self {
        Self {
            k_neighbors: 3.max((n_samples as f64 / 10.0).round() as usize),
            mu: 0.5,
            iterations: 20,
        }
    }
}

/// Fused similarity network plus the per-view affinities it was built from.
#[derive(Debug, Clone)]
pub struct FusedNetwork {
    pub fused: SymmetricMatrix,
    pub per_view: Vec<SymmetricMatrix>,
    pub k_neighbors: usize,
    pub iterations: usize,
    pub mu: Option<f64>,
}

impl FusedNetwork {
    /// Dissimilarity handed to silhouette for SNF results:
    /// `d = 1 - fused / max(fused)`, diagonal forced to zero.
    pub fn fused_distance(&self) -> SymmetricMatrix {
        let n = self.fused.n();
        let max = self
            .fused
            .values()
            .iter()
            .fold(0.0f64, |m, &v| m.max(v))
            .max(f64::MIN_POSITIVE);
        SymmetricMatrix::from_fn(n, |i, j| {
            if i == j {
                0.0
            } else {
                (1.0 - self.fused.get(i, j) / max).max(0.0)
            }
        })
    }
}

fn knn_mean_squared_distances(d: &SymmetricMatrix, k: usize) -> Vec<f64> {
    let n = d.n();
    (0..n)
        .map(|i| {
            let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d.get(i, j)).collect();
            others.sort_by(f64::total_cmp);
            others[..k].iter().map(|v| v * v).sum::<f64>() / k as f64
        })
        .collect()
}

/// Scaled exponential affinity kernel:
/// `W(i,j) = exp(-d(i,j)^2 / (mu * eps_ij))` with
/// `eps_ij = (mean_knn(i) + mean_knn(j) + d(i,j)^2) / 3`, where the kNN
/// means are over squared distances. Keeping every term of `eps` in squared
/// units makes the kernel invariant to a uniform rescaling of the distances.
pub fn snf_affinity(d: &SymmetricMatrix, k_neighbors: usize, mu: f64) -> Result<SymmetricMatrix> {
    d.validate_distance()?;
    let n = d.n();
    if k_neighbors == 0 || k_neighbors >= n {
        return Err(Error::Config(format!(
            "k_neighbors = {k_neighbors} out of range for {n} samples"
        )));
    }
    if !(mu > 0.0) {
        return Err(Error::Config(format!("mu must be positive, got {mu}")));
    }
    let means = knn_mean_squared_distances(d, k_neighbors);
    let mut w = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let dij = d.get(i, j);
            let eps = (means[i] + means[j] + dij * dij) / 3.0;
            let value = if eps == 0.0 {
                if i != j {
                    return Err(Error::Data(format!(
                        "degenerate duplicate-heavy data: zero kernel bandwidth for pair ({i}, {j})"
                    )));
                }
                1.0
            } else {
                (-dij * dij / (mu * eps)).exp()
            };
            w.set(i, j, value);
        }
    }
    Ok(w)
}

/// Full diffusion kernel: off-diagonal row entries sum to 1/2, diagonal 1/2.
fn normalize_kernel(w: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let n = w.n();
    let mut p = SymmetricMatrix::zeros(n);
    // row-wise normalization breaks exact symmetry; build the asymmetric
    // version first, then average with its transpose
    let mut rows = Matrix::zeros(n, n);
    for i in 0..n {
        let off_sum: f64 = (0..n).filter(|&j| j != i).map(|j| w.get(i, j)).sum();
        if off_sum <= 0.0 {
            return Err(Error::Data(format!(
                "sample {i} has zero similarity to every other sample"
            )));
        }
        for j in 0..n {
            let v = if i == j {
                0.5
            } else {
                w.get(i, j) / (2.0 * off_sum)
            };
            rows.set(i, j, v);
        }
    }
    for i in 0..n {
        for j in i..n {
            p.set(i, j, 0.5 * (rows.get(i, j) + rows.get(j, i)));
        }
    }
    Ok(p)
}

/// Sparse kNN kernel: row i keeps its `k` largest-affinity neighbors
/// (ties by index), renormalized to row sum 1. Not symmetric in general.
fn knn_kernel(w: &SymmetricMatrix, k: usize) -> Matrix {
    let n = w.n();
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| w.get(i, b).total_cmp(&w.get(i, a)).then(a.cmp(&b)));
        let kept = &order[..k];
        let sum: f64 = kept.iter().map(|&j| w.get(i, j)).sum();
        for &j in kept {
            s.set(i, j, w.get(i, j) / sum);
        }
    }
    s
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m, p) = (a.rows(), a.cols(), b.cols());
    let mut out = Matrix::zeros(n, p);
    for i in 0..n {
        let arow = a.row(i);
        for l in 0..m {
            let av = arow[l];
            if av == 0.0 {
                continue;
            }
            let brow = b.row(l);
            let orow = out.row_mut(i);
            for j in 0..p {
                orow[j] += av * brow[j];
            }
        }
    }
    out
}

/// Cross-view diffusion. With one view (or all views identical) the fused
/// network is that view's normalized kernel and no iteration happens; with
/// `iterations = 0` it is the plain mean of the normalized kernels.
pub fn snf_fuse(
    affinities: &[SymmetricMatrix],
    k_neighbors: usize,
    iterations: usize,
) -> Result<FusedNetwork> {
    if affinities.is_empty() {
        return Err(Error::Data("snf_fuse needs at least one affinity matrix".into()));
    }
    let n = affinities[0].n();
    if affinities.iter().any(|a| a.n() != n) {
        return Err(Error::Data(format!(
            "affinity matrices disagree on sample count (expected {n})"
        )));
    }
    if k_neighbors == 0 || k_neighbors >= n {
        return Err(Error::Config(format!(
            "k_neighbors = {k_neighbors} out of range for {n} samples"
        )));
    }

    // identical views carry no extra information; collapse them so a
    // duplicated view fuses to the same network as the view alone
    let distinct = affinities
        .iter()
        .all(|a| a.values() == affinities[0].values());
    let effective: &[SymmetricMatrix] = if distinct { &affinities[0..1] } else { affinities };

    let mut kernels: Vec<SymmetricMatrix> = effective
        .iter()
        .map(normalize_kernel)
        .collect::<Result<_>>()?;

    if kernels.len() > 1 && iterations > 0 {
        let sparse: Vec<Matrix> = effective.iter().map(|w| knn_kernel(w, k_neighbors)).collect();
        let sparse_t: Vec<Matrix> = sparse.iter().map(Matrix::transpose).collect();
        for _ in 0..iterations {
            let mut next = Vec::with_capacity(kernels.len());
            for v in 0..kernels.len() {
                // mean of the other views' kernels
                let mut mean = Matrix::zeros(n, n);
                let mut count = 0.0;
                for (u, p) in kernels.iter().enumerate() {
                    if u == v {
                        continue;
                    }
                    count += 1.0;
                    for i in 0..n {
                        let src = p.row(i);
                        let dst = mean.row_mut(i);
                        for j in 0..n {
                            dst[j] += src[j];
                        }
                    }
                }
                for i in 0..n {
                    for val in mean.row_mut(i) {
                        *val /= count;
                    }
                }
                let diffused = matmul(&matmul(&sparse[v], &mean), &sparse_t[v]);
                // symmetrize, then renormalize back into kernel form
                let sym = SymmetricMatrix::from_fn(n, |i, j| {
                    0.5 * (diffused.get(i, j) + diffused.get(j, i))
                });
                next.push(normalize_kernel(&sym)?);
            }
            kernels = next;
        }
    }

    let mut fused = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mean =
                kernels.iter().map(|p| p.get(i, j)).sum::<f64>() / kernels.len() as f64;
            fused.set(i, j, mean);
        }
    }
    Ok(FusedNetwork {
        fused,
        per_view: affinities.to_vec(),
        k_neighbors,
        iterations,
        mu: None,
    })
}

/// Full SNF pipeline over a view set: per-view distances, affinities, fusion,
/// then spectral clustering of the fused network.
pub fn snf_cluster(
    views: &ViewSet,
    k: usize,
    params: &SnfParams,
    metric: Metric,
    seed: u64,
) -> Result<(ClusterAssignment, FusedNetwork)> {
    let mut affinities = Vec::with_capacity(views.views().len());
    for view in views.views() {
        let x = view.data.to_matrix()?;
        let d = pairwise_distances(&x, metric)?;
        affinities.push(snf_affinity(&d, params.k_neighbors, params.mu)?);
    }
    let mut network = snf_fuse(&affinities, params.k_neighbors, params.iterations)?;
    network.mu = Some(params.mu);
    // diagonal zeroed by convention before the Laplacian
    let n = network.fused.n();
    let affinity = SymmetricMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            network.fused.get(i, j)
        }
    });
    let assignment = spectral(&affinity, k, seed)?;
    Ok((assignment, network))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{pairwise_distances, Metric};

    fn dist_1d(vals: &[f64]) -> SymmetricMatrix {
        let x = Matrix::from_rows(&vals.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap();
        pairwise_distances(&x, Metric::Euclidean).unwrap()
    }

    #[test]
    fn zero_distance_gives_unit_affinity() {
        let d = dist_1d(&[3.0, 3.0, 7.0, 8.0]);
        let w = snf_affinity(&d, 2, 0.5).unwrap();
        assert_eq!(w.get(0, 1), 1.0);
        assert_eq!(w.get(0, 0), 1.0);
    }

    #[test]
    fn affinity_is_scale_invariant() {
        let d = dist_1d(&[0.0, 1.0, 3.0, 10.0]);
        let scaled = SymmetricMatrix::from_fn(4, |i, j| 9.0 * d.get(i, j));
        let w1 = snf_affinity(&d, 2, 0.5).unwrap();
        let w2 = snf_affinity(&scaled, 2, 0.5).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((w1.get(i, j) - w2.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_blobs_within_exceeds_between() {
        let d = dist_1d(&[0.0, 0.3, 0.6, 0.9, 20.0, 20.3, 20.6, 20.9]);
        let w = snf_affinity(&d, 3, 0.5).unwrap();
        let mut min_within = f64::INFINITY;
        let mut max_between = 0.0f64;
        for i in 0..8 {
            for j in (i + 1)..8 {
                let v = w.get(i, j);
                if (i < 4) == (j < 4) {
                    min_within = min_within.min(v);
                } else {
                    max_between = max_between.max(v);
                }
            }
        }
        assert!(min_within > max_between);
    }

    #[test]
    fn duplicate_heavy_data_rejected() {
        let d = SymmetricMatrix::zeros(4);
        let err = snf_affinity(&d, 2, 0.5).unwrap_err();
        assert!(err.to_string().contains("pair"), "{err}");
    }

    #[test]
    fn single_view_fuse_is_normalized_kernel() {
        let d = dist_1d(&[0.0, 1.0, 5.0, 6.0]);
        let w = snf_affinity(&d, 2, 0.5).unwrap();
        let net = snf_fuse(std::slice::from_ref(&w), 2, 20).unwrap();
        let p = normalize_kernel(&w).unwrap();
        assert_eq!(net.fused, p);
    }

    #[test]
    fn identical_views_fuse_like_single_view() {
        let d = dist_1d(&[0.0, 1.0, 5.0, 6.0]);
        let w = snf_affinity(&d, 2, 0.5).unwrap();
        let single = snf_fuse(std::slice::from_ref(&w), 2, 20).unwrap();
        let double = snf_fuse(&[w.clone(), w], 2, 20).unwrap();
        assert_eq!(single.fused, double.fused);
    }

    #[test]
    fn zero_iterations_is_mean_of_kernels() {
        let d1 = dist_1d(&[0.0, 1.0, 5.0, 6.0]);
        let d2 = dist_1d(&[0.0, 2.0, 4.0, 7.0]);
        let w1 = snf_affinity(&d1, 2, 0.5).unwrap();
        let w2 = snf_affinity(&d2, 2, 0.5).unwrap();
        let net = snf_fuse(&[w1.clone(), w2.clone()], 2, 0).unwrap();
        let p1 = normalize_kernel(&w1).unwrap();
        let p2 = normalize_kernel(&w2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = 0.5 * (p1.get(i, j) + p2.get(i, j));
                assert!((net.fused.get(i, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let w1 = snf_affinity(&dist_1d(&[0.0, 1.0, 2.0, 5.0]), 2, 0.5).unwrap();
        let w2 = snf_affinity(&dist_1d(&[0.0, 1.0, 4.0]), 2, 0.5).unwrap();
        assert!(snf_fuse(&[w1, w2], 2, 5).is_err());
    }

    #[test]
    fn fused_entries_bounded_and_symmetric() {
        let d1 = dist_1d(&[0.0, 0.7, 1.1, 4.9, 5.3, 6.0, 9.1, 9.6, 10.4, 11.0, 14.2, 15.0]);
        let d2 = dist_1d(&[1.0, 0.2, 1.5, 5.5, 5.0, 6.3, 8.8, 9.9, 10.1, 11.4, 14.0, 15.3]);
        let w1 = snf_affinity(&d1, 3, 0.5).unwrap();
        let w2 = snf_affinity(&d2, 3, 0.5).unwrap();
        let net = snf_fuse(&[w1, w2], 3, 20).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let v = net.fused.get(i, j);
                assert!(v >= 0.0 && v <= 1.0 + 1e-12);
                assert_eq!(v, net.fused.get(j, i));
            }
        }
    }
}
