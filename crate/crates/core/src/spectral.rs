//! Spectral clustering on the normalized Laplacian: embed samples with the
//! eigenvectors of the k smallest eigenvalues, row-normalize, then k-means.

use crate::assignment::ClusterAssignment;
use crate::eigen::{normalized_laplacian, symmetric_eigen, Which};
use crate::error::{Error, Result};
use crate::kmeans::{kmeans, KMeansConfig};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Bandwidth rule for the Gaussian affinity kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffinityScale {
    /// One global bandwidth: the median off-diagonal distance.
    GlobalMedian,
    /// Per-sample bandwidth: mean distance to the given number of nearest
    /// neighbors (self excluded).
    LocalKnn(usize),
}

/// Gaussian affinity `a_ij = exp(-d_ij^2 / (sigma_i * sigma_j))` with the
/// diagonal set to 0.
pub fn gaussian_affinity(d: &SymmetricMatrix, scale: AffinityScale) -> Result<SymmetricMatrix> {
    d.validate_distance()?;
    let n = d.n();
    if n < 2 {
        return Err(Error::Data("affinity needs at least 2 samples".into()));
    }
    let sigmas: Vec<f64> = match scale {
        AffinityScale::GlobalMedian => {
            let mut offdiag: Vec<f64> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .map(|(i, j)| d.get(i, j))
                .collect();
            offdiag.sort_by(f64::total_cmp);
            let m = offdiag.len();
            let median = if m % 2 == 1 {
                offdiag[m / 2]
            } else {
                0.5 * (offdiag[m / 2 - 1] + offdiag[m / 2])
            };
            if median == 0.0 {
                return Err(Error::Data(
                    "degenerate data: median pairwise distance is zero".into(),
                ));
            }
            vec![median; n]
        }
        AffinityScale::LocalKnn(k_n) => {
            if k_n == 0 || k_n >= n {
                return Err(Error::Config(format!(
                    "local scaling neighbor count {k_n} out of range for {n} samples"
                )));
            }
            let mut sigmas = Vec::with_capacity(n);
            for i in 0..n {
                let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d.get(i, j)).collect();
                others.sort_by(f64::total_cmp);
                let sigma = others[..k_n].iter().sum::<f64>() / k_n as f64;
                if sigma == 0.0 {
                    return Err(Error::Data(format!(
                        "degenerate data: sample {i} has zero distance to its {k_n} nearest neighbors"
                    )));
                }
                sigmas.push(sigma);
            }
            sigmas
        }
    };
    let mut a = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = d.get(i, j);
            a.set(i, j, (-dij * dij / (sigmas[i] * sigmas[j])).exp());
        }
    }
    Ok(a)
}

/// Spectral embedding: columns are the eigenvectors of the k smallest
/// Laplacian eigenvalues, rows normalized to unit length (zero rows kept
/// as-is).
pub fn spectral_embedding(a: &SymmetricMatrix, k: usize) -> Result<Matrix> {
    let l = normalized_laplacian(a)?;
    let pairs = symmetric_eigen(&l, k, Which::Smallest)?;
    let mut emb = pairs.vectors;
    for i in 0..emb.rows() {
        let row = emb.row_mut(i);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    }
    Ok(emb)
}

/// Ng-Jordan spectral clustering of an affinity matrix.
pub fn spectral(a: &SymmetricMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
    if k == 0 || k > a.n() {
        return Err(Error::Config(format!(
            "cluster count {k} out of range for {} samples",
            a.n()
        )));
    }
    let emb = spectral_embedding(a, k)?;
    let result = kmeans(&emb, &KMeansConfig::new(k, seed))?;
    Ok(result.assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{pairwise_distances, Metric};

    fn blobs_1d(vals: &[f64]) -> SymmetricMatrix {
        let x = Matrix::from_rows(&vals.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap();
        pairwise_distances(&x, Metric::Euclidean).unwrap()
    }

    #[test]
    fn global_median_uniform_distances_give_equal_affinities() {
        let mut d = SymmetricMatrix::zeros(3);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            d.set(i, j, 2.0);
        }
        let a = gaussian_affinity(&d, AffinityScale::GlobalMedian).unwrap();
        let expect = (-1.0f64).exp();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((a.get(i, j) - expect).abs() < 1e-15);
        }
        assert_eq!(a.get(0, 0), 0.0);
    }

    #[test]
    fn global_median_is_scale_invariant() {
        let d = blobs_1d(&[0.0, 1.0, 3.0, 10.0]);
        let scaled = SymmetricMatrix::from_fn(4, |i, j| 7.0 * d.get(i, j));
        let a1 = gaussian_affinity(&d, AffinityScale::GlobalMedian).unwrap();
        let a2 = gaussian_affinity(&scaled, AffinityScale::GlobalMedian).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((a1.get(i, j) - a2.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_blobs_within_exceeds_between() {
        let d = blobs_1d(&[0.0, 0.5, 1.0, 20.0, 20.5, 21.0]);
        for scale in [AffinityScale::GlobalMedian, AffinityScale::LocalKnn(2)] {
            let a = gaussian_affinity(&d, scale).unwrap();
            let within = a.get(0, 1).min(a.get(0, 2)).min(a.get(3, 4));
            let between = a.get(0, 3).max(a.get(2, 3)).max(a.get(0, 5));
            assert!(within > between);
        }
    }

    #[test]
    fn all_zero_distances_rejected() {
        let d = SymmetricMatrix::zeros(4);
        assert!(gaussian_affinity(&d, AffinityScale::GlobalMedian).is_err());
    }

    #[test]
    fn block_diagonal_affinity_recovers_blocks() {
        // two disconnected components
        let mut a = SymmetricMatrix::zeros(6);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            a.set(i, j, 1.0);
        }
        for (i, j) in [(3, 4), (3, 5), (4, 5)] {
            a.set(i, j, 1.0);
        }
        let got = spectral(&a, 2, 0).unwrap();
        assert_eq!(got.labels(), &[0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn k_one_single_cluster() {
        let mut a = SymmetricMatrix::zeros(4);
        for i in 0..4 {
            for j in (i + 1)..4 {
                a.set(i, j, 1.0);
            }
        }
        let got = spectral(&a, 1, 0).unwrap();
        assert_eq!(got.k(), 1);
    }

    #[test]
    fn permuting_affinity_permutes_assignment() {
        let d = blobs_1d(&[0.0, 0.4, 1.0, 9.0, 9.5, 10.0]);
        let a = gaussian_affinity(&d, AffinityScale::GlobalMedian).unwrap();
        let perm = [3, 0, 5, 1, 4, 2];
        let ap = a.permute(&perm);
        let base = spectral(&a, 2, 11).unwrap();
        let permuted = spectral(&ap, 2, 11).unwrap();
        let ari = crate::metrics::adjusted_rand_index(
            &ClusterAssignment::from_labels(
                &perm.iter().map(|&i| base.labels()[i]).collect::<Vec<_>>(),
            )
            .unwrap(),
            &permuted,
        )
        .unwrap();
        assert!((ari - 1.0).abs() < 1e-12);
    }
}
