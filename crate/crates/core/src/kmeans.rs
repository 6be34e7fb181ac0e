//! Lloyd's k-means with k-means++ or random initialization.

use std::collections::HashSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::assignment::ClusterAssignment;
use crate::distance::squared_euclidean;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Center initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    KMeansPlusPlus,
    Random,
}

#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub k: usize,
    pub init: Init,
    pub max_iter: usize,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            init: Init::KMeansPlusPlus,
            max_iter: 300,
            seed,
        }
    }
}

/// Convergence threshold on the max-norm center movement; makes "no further
/// changes on the cluster centers" numerical.
const CENTER_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub assignment: ClusterAssignment,
    /// k x features matrix; row `c` is the mean of cluster `c`'s members.
    pub centers: Matrix,
    /// Within-cluster sum of squared euclidean distances after each iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl KMeansResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().unwrap()
    }
}

fn distinct_row_count(x: &Matrix) -> usize {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for i in 0..x.rows() {
        seen.insert(x.row(i).iter().map(|v| v.to_bits()).collect());
    }
    seen.len()
}

/// Nearest center index; ties go to the lowest index.
fn nearest_center(point: &[f64], centers: &Matrix) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for c in 0..centers.rows() {
        let d = squared_euclidean(point, centers.row(c));
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn init_centers(x: &Matrix, cfg: &KMeansConfig, rng: &mut ChaCha8Rng) -> Matrix {
    let n = x.rows();
    let k = cfg.k;
    let mut centers = Matrix::zeros(k, x.cols());
    match cfg.init {
        Init::Random => {
            let idx = rand::seq::index::sample(rng, n, k);
            for (c, i) in idx.into_iter().enumerate() {
                centers.row_mut(c).copy_from_slice(x.row(i));
            }
        }
        Init::KMeansPlusPlus => {
            let first = rng.random_range(0..n);
            centers.row_mut(0).copy_from_slice(x.row(first));
            let mut d2: Vec<f64> = (0..n)
                .map(|i| squared_euclidean(x.row(i), centers.row(0)))
                .collect();
            for c in 1..k {
                let total: f64 = d2.iter().sum();
                let chosen = if total > 0.0 {
                    let mut r = rng.random::<f64>() * total;
                    let mut pick = n - 1;
                    for (i, &w) in d2.iter().enumerate() {
                        if r < w {
                            pick = i;
                            break;
                        }
                        r -= w;
                    }
                    pick
                } else {
                    // all points coincide with chosen centers; cannot happen
                    // while k <= distinct rows, but stay deterministic anyway
                    c % n
                };
                centers.row_mut(c).copy_from_slice(x.row(chosen));
                for i in 0..n {
                    let d = squared_euclidean(x.row(i), centers.row(c));
                    if d < d2[i] {
                        d2[i] = d;
                    }
                }
            }
        }
    }
    centers
}

/// Moves each empty cluster's center onto the point farthest from it, drawing
/// only from clusters that can spare a member.
fn fix_empty_clusters(x: &Matrix, centers: &mut Matrix, labels: &mut [usize], k: usize) {
    loop {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut far_idx = None;
        let mut far_d = -1.0;
        for i in 0..x.rows() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = squared_euclidean(x.row(i), centers.row(empty));
            if d > far_d {
                far_d = d;
                far_idx = Some(i);
            }
        }
        let i = far_idx.expect("a cluster with >=2 members exists when another is empty");
        centers.row_mut(empty).copy_from_slice(x.row(i));
        labels[i] = empty;
    }
}

fn cluster_means(x: &Matrix, labels: &[usize], k: usize) -> Matrix {
    let mut centers = Matrix::zeros(k, x.cols());
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        let row = x.row(i);
        let center = centers.row_mut(l);
        for (c, v) in center.iter_mut().zip(row) {
            *c += v;
        }
    }
    for l in 0..k {
        let center = centers.row_mut(l);
        for c in center.iter_mut() {
            *c /= counts[l] as f64;
        }
    }
    centers
}

fn sse(x: &Matrix, labels: &[usize], centers: &Matrix) -> f64 {
    (0..x.rows())
        .map(|i| squared_euclidean(x.row(i), centers.row(labels[i])))
        .sum()
}

/// Lloyd's algorithm: alternate nearest-center assignment and recentering
/// until the centers stop moving or `max_iter` is reached.
pub fn kmeans(x: &Matrix, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let n = x.rows();
    if cfg.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let distinct = distinct_row_count(x);
    if cfg.k > distinct {
        return Err(Error::Config(format!(
            "k = {} exceeds the {distinct} distinct rows of the data",
            cfg.k
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut centers = init_centers(x, cfg, &mut rng);
    let mut labels: Vec<usize> = (0..n).map(|i| nearest_center(x.row(i), &centers)).collect();

    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iter.max(1) {
        fix_empty_clusters(x, &mut centers, &mut labels, cfg.k);
        let new_centers = cluster_means(x, &labels, cfg.k);
        trace.push(sse(x, &labels, &new_centers));
        let movement = (0..cfg.k)
            .flat_map(|c| {
                centers
                    .row(c)
                    .iter()
                    .zip(new_centers.row(c))
                    .map(|(a, b)| (a - b).abs())
            })
            .fold(0.0f64, f64::max);
        centers = new_centers;
        if movement < CENTER_TOL {
            converged = true;
            break;
        }
        let new_labels: Vec<usize> =
            (0..n).map(|i| nearest_center(x.row(i), &centers)).collect();
        if new_labels == labels {
            converged = true;
            break;
        }
        labels = new_labels;
    }

    // canonical label order, with centers permuted to match
    let assignment = ClusterAssignment::from_labels(&labels)?;
    let mut order = vec![usize::MAX; cfg.k];
    for (i, &raw) in labels.iter().enumerate() {
        let canon = assignment.labels()[i];
        order[canon] = raw;
    }
    let centers = centers.select_rows(&order);

    Ok(KMeansResult {
        assignment,
        centers,
        iterations: trace.len(),
        objective_trace: trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points_1d(vals: &[f64]) -> Matrix {
        Matrix::from_rows(&vals.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_well_separated_pairs() {
        let x = points_1d(&[0.0, 1.0, 10.0, 11.0]);
        let r = kmeans(&x, &KMeansConfig::new(2, 42)).unwrap();
        assert_eq!(r.assignment.labels(), &[0, 0, 1, 1]);
        let mut centers: Vec<f64> = (0..2).map(|c| r.centers.get(c, 0)).collect();
        centers.sort_by(f64::total_cmp);
        assert_eq!(centers, vec![0.5, 10.5]);
        assert!((r.objective() - 1.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn k_one_returns_column_means() {
        let x = points_1d(&[0.0, 2.0, 4.0]);
        let r = kmeans(&x, &KMeansConfig::new(1, 0)).unwrap();
        assert_eq!(r.centers.get(0, 0), 2.0);
        assert!((r.objective() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_zero_objective() {
        let x = points_1d(&[0.0, 1.0, 2.0, 3.0]);
        let r = kmeans(&x, &KMeansConfig::new(4, 3)).unwrap();
        assert_eq!(r.objective(), 0.0);
        assert_eq!(r.assignment.k(), 4);
    }

    #[test]
    fn k_above_distinct_rows_rejected() {
        let x = points_1d(&[1.0, 1.0, 2.0]);
        assert!(kmeans(&x, &KMeansConfig::new(3, 0)).is_err());
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let x = points_1d(&[0.0, 1.0, 5.0, 6.0, 10.0, 11.0]);
        let a = kmeans(&x, &KMeansConfig::new(3, 9)).unwrap();
        let b = kmeans(&x, &KMeansConfig::new(3, 9)).unwrap();
        assert_eq!(a.assignment.labels(), b.assignment.labels());
        assert_eq!(a.objective_trace, b.objective_trace);
    }

    #[test]
    fn trace_non_increasing() {
        let x = points_1d(&[0.0, 0.5, 1.0, 5.0, 5.5, 9.0, 9.5, 10.0]);
        for seed in 0..20 {
            let r = kmeans(&x, &KMeansConfig::new(3, seed)).unwrap();
            for w in r.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn random_init_supported() {
        let x = points_1d(&[0.0, 1.0, 10.0, 11.0]);
        let mut cfg = KMeansConfig::new(2, 1);
        cfg.init = Init::Random;
        let r = kmeans(&x, &cfg).unwrap();
        assert_eq!(r.assignment.k(), 2);
    }
}
