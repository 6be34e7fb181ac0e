//! Agglomerative hierarchical clustering and dendrogram cutting.
//!
//! Cluster ids follow the usual stepwise convention: leaves are `0..n`, the
//! cluster created by merge `m` gets id `n + m`.

use crate::assignment::ClusterAssignment;
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Single,
    Complete,
    Average,
}

impl Default for Linkage {
    fn default() -> Self {
        Linkage::Average
    }
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::Config(format!("unknown linkage: {other}"))),
        }
    }
}

/// One agglomeration step; `left < right` always.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Stepwise dendrogram: exactly `leaves - 1` merges.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    merges: Vec<Merge>,
    leaves: usize,
}

impl Dendrogram {
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }
}

/// Bottom-up agglomeration under the chosen linkage.
///
/// When several pairs tie at the minimal distance, the pair with the
/// lexicographically smallest `(min id, max id)` merges first.
pub fn hierarchical(d: &SymmetricMatrix, linkage: Linkage) -> Result<Dendrogram> {
    d.validate_distance()?;
    let n = d.n();
    if n < 2 {
        return Err(Error::Data("need at least 2 samples to build a dendrogram".into()));
    }

    // working inter-cluster distance matrix, indexed by slot; each active slot
    // carries its stepwise cluster id and size
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| d.row(i).to_vec()).collect();
    let mut active: Vec<bool> = vec![true; n];
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes: Vec<usize> = vec![1; n];
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..(n - 1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in (a + 1)..n {
                if !active[b] {
                    continue;
                }
                let dv = dist[a][b];
                let key = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                let better = match best {
                    None => true,
                    Some((bd, bi, bj)) => {
                        let bkey = (ids[bi].min(ids[bj]), ids[bi].max(ids[bj]));
                        dv < bd || (dv == bd && key < bkey)
                    }
                };
                if better {
                    best = Some((dv, a, b));
                }
            }
        }
        let (height, a, b) = best.unwrap();
        let (id_a, id_b) = (ids[a], ids[b]);
        let new_size = sizes[a] + sizes[b];
        merges.push(Merge {
            left: id_a.min(id_b),
            right: id_a.max(id_b),
            height,
            size: new_size,
        });

        // Lance-Williams update into slot a; slot b retires
        for c in 0..n {
            if !active[c] || c == a || c == b {
                continue;
            }
            let dac = dist[a][c];
            let dbc = dist[b][c];
            let merged = match linkage {
                Linkage::Single => dac.min(dbc),
                Linkage::Complete => dac.max(dbc),
                Linkage::Average => {
                    (sizes[a] as f64 * dac + sizes[b] as f64 * dbc) / new_size as f64
                }
            };
            dist[a][c] = merged;
            dist[c][a] = merged;
        }
        active[b] = false;
        sizes[a] = new_size;
        ids[a] = n + step;
    }

    Ok(Dendrogram { merges, leaves: n })
}

/// Flat partition obtained by undoing the last `k - 1` merges.
pub fn cut_dendrogram(dend: &Dendrogram, k: usize) -> Result<ClusterAssignment> {
    let n = dend.leaves;
    if k == 0 || k > n {
        return Err(Error::Config(format!(
            "cannot cut a {n}-leaf dendrogram into {k} clusters"
        )));
    }
    // union-find over stepwise ids, replaying the first n - k merges
    let mut parent: Vec<usize> = (0..(2 * n - 1)).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in dend.merges.iter().take(n - k).enumerate() {
        let target = n + step;
        let ra = find(&mut parent, m.left);
        let rb = find(&mut parent, m.right);
        parent[ra] = target;
        parent[rb] = target;
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    ClusterAssignment::from_labels(&roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{pairwise_distances, Metric};
    use crate::matrix::Matrix;

    fn points_1d(vals: &[f64]) -> SymmetricMatrix {
        let x = Matrix::from_rows(&vals.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap();
        pairwise_distances(&x, Metric::Euclidean).unwrap()
    }

    #[test]
    fn first_merges_are_the_tight_pairs() {
        let d = points_1d(&[0.0, 1.0, 10.0, 11.0]);
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let dend = hierarchical(&d, linkage).unwrap();
            let m = dend.merges();
            assert_eq!((m[0].left, m[0].right), (0, 1));
            assert_eq!((m[1].left, m[1].right), (2, 3));
            assert_eq!(m[0].height, 1.0);
        }
    }

    #[test]
    fn two_samples_single_merge() {
        let d = points_1d(&[0.0, 7.0]);
        let dend = hierarchical(&d, Linkage::Average).unwrap();
        assert_eq!(dend.merges().len(), 1);
        assert_eq!(dend.merges()[0].height, 7.0);
        assert_eq!(dend.merges()[0].size, 2);
    }

    #[test]
    fn equal_distances_follow_index_tie_rule() {
        let mut d = SymmetricMatrix::zeros(3);
        d.set(0, 1, 2.0);
        d.set(0, 2, 2.0);
        d.set(1, 2, 2.0);
        let dend = hierarchical(&d, Linkage::Single).unwrap();
        let m = dend.merges();
        assert_eq!((m[0].left, m[0].right), (0, 1));
        assert_eq!((m[1].left, m[1].right), (2, 3));
        assert!(m.iter().all(|m| m.height == 2.0));
    }

    #[test]
    fn cut_recovers_pairs() {
        let d = points_1d(&[0.0, 1.0, 10.0, 11.0]);
        let dend = hierarchical(&d, Linkage::Average).unwrap();
        let cut = cut_dendrogram(&dend, 2).unwrap();
        assert_eq!(cut.labels(), &[0, 0, 1, 1]);
        assert_eq!(cut_dendrogram(&dend, 1).unwrap().k(), 1);
        let singletons = cut_dendrogram(&dend, 4).unwrap();
        assert_eq!(singletons.labels(), &[0, 1, 2, 3]);
    }

    #[test]
    fn cut_out_of_range_rejected() {
        let d = points_1d(&[0.0, 1.0]);
        let dend = hierarchical(&d, Linkage::Average).unwrap();
        assert!(cut_dendrogram(&dend, 0).is_err());
        assert!(cut_dendrogram(&dend, 3).is_err());
    }

    #[test]
    fn heights_non_decreasing() {
        let d = points_1d(&[0.3, 1.7, 2.0, 5.5, 8.1, 8.4, 9.9]);
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let dend = hierarchical(&d, linkage).unwrap();
            for w in dend.merges().windows(2) {
                assert!(w[1].height >= w[0].height - 1e-12);
            }
        }
    }

    #[test]
    fn rejects_invalid_distance_matrix() {
        let mut d = SymmetricMatrix::zeros(2);
        d.set(0, 0, 1.0);
        assert!(hierarchical(&d, Linkage::Average).is_err());
    }

    #[test]
    fn cuts_refine() {
        let d = points_1d(&[0.0, 0.4, 1.0, 4.0, 4.2, 9.0]);
        let dend = hierarchical(&d, Linkage::Average).unwrap();
        for k in 2..=5 {
            let coarse = cut_dendrogram(&dend, k - 1).unwrap();
            let fine = cut_dendrogram(&dend, k).unwrap();
            // every fine cluster sits inside one coarse cluster
            for group in fine.clusters() {
                let c = coarse.labels()[group[0]];
                assert!(group.iter().all(|&i| coarse.labels()[i] == c));
            }
        }
    }
}
