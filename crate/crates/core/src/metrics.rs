//! Cluster validity measures: silhouette widths, ASW, adjusted Rand index,
//! and the sample ordering used to render block-diagonal consensus heatmaps.

use crate::assignment::ClusterAssignment;
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Per-sample silhouette widths for one flat clustering.
#[derive(Debug, Clone)]
pub struct SilhouetteReport {
    /// s(i) per sample, in input order.
    pub widths: Vec<f64>,
    /// Widths grouped per cluster, each group sorted descending (the layout
    /// of a silhouette plot).
    pub per_cluster: Vec<Vec<f64>>,
    /// Mean width over all samples.
    pub asw: f64,
    pub k: usize,
}

/// Silhouette width of every sample.
///
/// `a(i)` is the mean distance to the other members of i's cluster, `b(i)`
/// the smallest mean distance to any other cluster, and
/// `s(i) = (b(i) - a(i)) / max(a(i), b(i))`. Members of singleton clusters
/// get `s(i) = 0`.
pub fn silhouette_widths(
    d: &SymmetricMatrix,
    assignment: &ClusterAssignment,
) -> Result<SilhouetteReport> {
    let n = d.n();
    if assignment.len() != n {
        return Err(Error::Data(format!(
            "assignment covers {} samples but distance matrix has {n}",
            assignment.len()
        )));
    }
    d.validate_distance()?;
    let k = assignment.k();
    if k < 2 {
        return Err(Error::Data(
            "silhouette requires at least 2 clusters".into(),
        ));
    }
    let labels = assignment.labels();
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }

    let mut widths = Vec::with_capacity(n);
    for i in 0..n {
        let own = labels[i];
        if sizes[own] == 1 {
            widths.push(0.0);
            continue;
        }
        let mut sums = vec![0.0f64; k];
        for j in 0..n {
            if j != i {
                sums[labels[j]] += d.get(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        widths.push(if denom > 0.0 { (b - a) / denom } else { 0.0 });
    }

    let mut per_cluster = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        per_cluster[l].push(widths[i]);
    }
    for group in &mut per_cluster {
        group.sort_by(|a, b| b.total_cmp(a));
    }
    let asw = widths.iter().sum::<f64>() / n as f64;
    Ok(SilhouetteReport {
        widths,
        per_cluster,
        asw,
        k,
    })
}

/// Average silhouette width.
pub fn asw(d: &SymmetricMatrix, assignment: &ClusterAssignment) -> Result<f64> {
    Ok(silhouette_widths(d, assignment)?.asw)
}

/// Adjusted Rand index between two partitions of the same samples.
pub fn adjusted_rand_index(a: &ClusterAssignment, b: &ClusterAssignment) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Data(format!(
            "partition lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let (ka, kb) = (a.k(), b.k());
    let mut table = vec![0u64; ka * kb];
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        table[la * kb + lb] += 1;
    }
    let choose2 = |x: u64| -> f64 { (x as f64) * (x as f64 - 1.0) / 2.0 };
    let n = a.len() as u64;
    let sum_cells: f64 = table.iter().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = (0..ka)
        .map(|i| choose2((0..kb).map(|j| table[i * kb + j]).sum()))
        .sum();
    let sum_cols: f64 = (0..kb)
        .map(|j| choose2((0..ka).map(|i| table[i * kb + j]).sum()))
        .sum();
    let total = choose2(n);
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index - expected).abs() < 1e-300 {
        // both partitions trivial (all-singletons or single cluster)
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / (max_index - expected))
}

/// Permutation placing samples of the same cluster contiguously, each block
/// ordered by descending mean within-cluster consensus (ties by index).
/// Applied to the consensus matrix this reproduces the block-diagonal
/// heatmap layout.
pub fn reorder_for_heatmap(values: &SymmetricMatrix, assignment: &ClusterAssignment) -> Vec<usize> {
    let mut perm = Vec::with_capacity(values.n());
    for group in assignment.clusters() {
        let mut scored: Vec<(f64, usize)> = group
            .iter()
            .map(|&i| {
                let mean = if group.len() > 1 {
                    group
                        .iter()
                        .filter(|&&j| j != i)
                        .map(|&j| values.get(i, j))
                        .sum::<f64>()
                        / (group.len() - 1) as f64
                } else {
                    0.0
                };
                (mean, i)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        perm.extend(scored.into_iter().map(|(_, i)| i));
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{pairwise_distances, Metric};
    use crate::matrix::Matrix;

    fn dist_1d(vals: &[f64]) -> SymmetricMatrix {
        let x = Matrix::from_rows(&vals.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap();
        pairwise_distances(&x, Metric::Euclidean).unwrap()
    }

    #[test]
    fn hand_case_four_points() {
        let d = dist_1d(&[0.0, 1.0, 10.0, 11.0]);
        let a = ClusterAssignment::from_labels(&[0, 0, 1, 1]).unwrap();
        let rep = silhouette_widths(&d, &a).unwrap();
        let expect = [0.904762, 0.894737, 0.894737, 0.904762];
        for (got, want) in rep.widths.iter().zip(expect) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!((rep.asw - 0.899749).abs() < 1e-6);
    }

    #[test]
    fn singleton_member_gets_zero() {
        let d = dist_1d(&[0.0, 1.0, 10.0]);
        let a = ClusterAssignment::from_labels(&[0, 0, 1]).unwrap();
        let rep = silhouette_widths(&d, &a).unwrap();
        assert_eq!(rep.widths[2], 0.0);
    }

    #[test]
    fn coincident_pair_near_one() {
        let d = dist_1d(&[5.0, 5.0, 100.0, 101.0]);
        let a = ClusterAssignment::from_labels(&[0, 0, 1, 1]).unwrap();
        let rep = silhouette_widths(&d, &a).unwrap();
        assert!(rep.widths[0] > 0.99 && rep.widths[1] > 0.99);
    }

    #[test]
    fn single_cluster_rejected() {
        let d = dist_1d(&[0.0, 1.0]);
        let a = ClusterAssignment::from_labels(&[0, 0]).unwrap();
        assert!(silhouette_widths(&d, &a).is_err());
    }

    #[test]
    fn silhouette_scale_invariant() {
        let d = dist_1d(&[0.0, 0.7, 3.0, 3.5, 9.0]);
        let scaled = SymmetricMatrix::from_fn(5, |i, j| 13.0 * d.get(i, j));
        let a = ClusterAssignment::from_labels(&[0, 0, 1, 1, 2]).unwrap();
        let r1 = silhouette_widths(&d, &a).unwrap();
        let r2 = silhouette_widths(&scaled, &a).unwrap();
        for (x, y) in r1.widths.iter().zip(&r2.widths) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ari_identical_and_renamed() {
        let a = ClusterAssignment::from_labels(&[0, 0, 1, 1, 2]).unwrap();
        let b = ClusterAssignment::from_labels(&[2, 2, 0, 0, 1]).unwrap();
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn ari_hand_contingency() {
        // partitions {01|23|45} vs {012|345}: contingency rows (2,0),(1,1),(0,2)
        // sum cells C2 = 1+1 = 2? cells: 2,0,1,1,0,2 -> choose2: 1+0+0+0+0+1 = 2
        // rows a: 2,2,2 -> 3; cols b: 3,3 -> 6; n=6 total C2 = 15
        // expected = 3*6/15 = 1.2; max = 4.5; ari = (2-1.2)/(4.5-1.2) = 0.242424...
        let a = ClusterAssignment::from_labels(&[0, 0, 1, 1, 2, 2]).unwrap();
        let b = ClusterAssignment::from_labels(&[0, 0, 0, 1, 1, 1]).unwrap();
        let ari = adjusted_rand_index(&a, &b).unwrap();
        assert!((ari - 0.8 / 3.3).abs() < 1e-12, "{ari}");
    }

    #[test]
    fn ari_length_mismatch_rejected() {
        let a = ClusterAssignment::from_labels(&[0, 1]).unwrap();
        let b = ClusterAssignment::from_labels(&[0, 1, 0]).unwrap();
        assert!(adjusted_rand_index(&a, &b).is_err());
    }

    #[test]
    fn heatmap_restores_shuffled_blocks() {
        // block matrix over 6 samples, blocks {0,1,2} and {3,4,5}, then shuffled
        let mut m = SymmetricMatrix::zeros(6);
        for i in 0..6 {
            m.set(i, i, 1.0);
            for j in (i + 1)..6 {
                let same = (i < 3) == (j < 3);
                m.set(i, j, if same { 1.0 } else { 0.0 });
            }
        }
        let shuffle = [4, 0, 3, 1, 5, 2];
        let shuffled = m.permute(&shuffle);
        let labels: Vec<usize> = shuffle.iter().map(|&i| usize::from(i >= 3)).collect();
        let a = ClusterAssignment::from_labels(&labels).unwrap();
        let perm = reorder_for_heatmap(&shuffled, &a);
        let restored = shuffled.permute(&perm);
        for i in 0..6 {
            for j in 0..6 {
                let same = (i < 3) == (j < 3);
                assert_eq!(restored.get(i, j), if same { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn heatmap_permutation_is_bijection() {
        let m = SymmetricMatrix::from_fn(5, |i, j| ((i * 7 + j * 3) % 5) as f64 / 5.0);
        let a = ClusterAssignment::from_labels(&[0, 1, 0, 1, 0]).unwrap();
        let mut perm = reorder_for_heatmap(&m, &a);
        perm.sort_unstable();
        assert_eq!(perm, vec![0, 1, 2, 3, 4]);
    }
}
