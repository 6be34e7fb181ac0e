//! Resampling-based consensus clustering: ensemble generation, consensus
//! matrix, CDF-based selection of the cluster count, and final membership
//! derivation from the consensus matrix.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assignment::ClusterAssignment;
use crate::distance::{pairwise_distances, Metric};
use crate::error::{Error, Result};
use crate::hierarchy::{cut_dendrogram, hierarchical, Linkage};
use crate::ingest::ViewSet;
use crate::kmeans::{kmeans, Init, KMeansConfig};
use crate::matrix::SymmetricMatrix;
use crate::snf::{snf_cluster, SnfParams};

/// Base clustering algorithm run on every ensemble instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseAlgorithm {
    KMeans,
    Hierarchical,
    Snf,
}

impl std::str::FromStr for BaseAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(BaseAlgorithm::KMeans),
            "hier" | "hierarchical" => Ok(BaseAlgorithm::Hierarchical),
            "snf" => Ok(BaseAlgorithm::Snf),
            other => Err(Error::Config(format!("unknown base algorithm: {other}"))),
        }
    }
}

/// Ensemble generation parameters.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub base: BaseAlgorithm,
    pub k: usize,
    pub size: usize,
    /// Fraction of samples drawn (without replacement) per instance.
    pub resample_fraction: f64,
    /// Fraction of features kept per view per instance; 1.0 disables
    /// feature subsampling.
    pub feature_fraction: f64,
    pub master_seed: u64,
    pub metric: Metric,
    pub linkage: Linkage,
    pub kmeans_init: Init,
    /// SNF parameters; `None` derives defaults from the subsample size.
    pub snf: Option<SnfParams>,
}

impl EnsembleConfig {
    pub fn new(base: BaseAlgorithm, k: usize, size: usize, master_seed: u64) -> Self {
        Self {
            base,
            k,
            size,
            resample_fraction: 0.8,
            feature_fraction: 1.0,
            master_seed,
            metric: Metric::Euclidean,
            linkage: Linkage::Average,
            kmeans_init: Init::KMeansPlusPlus,
            snf: None,
        }
    }
}

/// Stable per-instance seed derivation (splitmix64 finalizer applied twice),
/// so parallel generation reproduces byte-identical ensembles.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    for _ in 0..2 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// One clustering of one subsample.
#[derive(Debug, Clone)]
pub struct EnsembleInstance {
    /// Inclusion flag per sample of the full cohort.
    pub mask: Vec<bool>,
    /// Labels for the masked-in samples, in ascending sample order.
    pub labels: ClusterAssignment,
    pub seed: u64,
    pub resample_fraction: f64,
    /// Per-view kept feature indices; empty when no feature subsampling.
    pub feature_subset: Vec<Vec<usize>>,
}

const INSTANCE_RETRIES: usize = 5;

fn cluster_subsample(
    data: &ViewSet,
    sample_idx: &[usize],
    feature_idx: &[Vec<usize>],
    cfg: &EnsembleConfig,
    seed: u64,
) -> Result<ClusterAssignment> {
    let mut sub = data.subset_samples(sample_idx);
    if !feature_idx.is_empty() {
        sub = sub.subset_features(feature_idx);
    }
    match cfg.base {
        BaseAlgorithm::KMeans => {
            let x = sub.stacked_matrix()?;
            let mut kc = KMeansConfig::new(cfg.k, seed);
            kc.init = cfg.kmeans_init;
            Ok(kmeans(&x, &kc)?.assignment)
        }
        BaseAlgorithm::Hierarchical => {
            let x = sub.stacked_matrix()?;
            let d = pairwise_distances(&x, cfg.metric)?;
            let dend = hierarchical(&d, cfg.linkage)?;
            cut_dendrogram(&dend, cfg.k)
        }
        BaseAlgorithm::Snf => {
            let m = sub.n_samples();
            let mut params = cfg.snf.unwrap_or_else(|| SnfParams::defaults_for(m));
            params.k_neighbors = params.k_neighbors.min(m.saturating_sub(1)).max(1);
            let (assignment, _) = snf_cluster(&sub, cfg.k, &params, cfg.metric, seed)?;
            Ok(assignment)
        }
    }
}

fn generate_instance(
    data: &ViewSet,
    cfg: &EnsembleConfig,
    index: u64,
) -> Result<EnsembleInstance> {
    let n = data.n_samples();
    let m = ((cfg.resample_fraction * n as f64).round() as usize).clamp(1, n);
    let mut last_err = None;
    for retry in 0..=INSTANCE_RETRIES {
        let seed = if retry == 0 {
            child_seed(cfg.master_seed, index)
        } else {
            child_seed(child_seed(cfg.master_seed, index), retry as u64)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample_idx: Vec<usize> = rand::seq::index::sample(&mut rng, n, m).into_vec();
        sample_idx.sort_unstable();
        let feature_idx: Vec<Vec<usize>> = if cfg.feature_fraction < 1.0 {
            data.views()
                .iter()
                .map(|v| {
                    let p = v.data.n_features();
                    let keep = ((cfg.feature_fraction * p as f64).round() as usize).clamp(1, p);
                    let mut idx = rand::seq::index::sample(&mut rng, p, keep).into_vec();
                    idx.sort_unstable();
                    idx
                })
                .collect()
        } else {
            Vec::new()
        };
        if m < cfg.k {
            last_err = Some(Error::Config(format!(
                "subsample of {m} samples cannot hold {} clusters",
                cfg.k
            )));
            continue;
        }
        match cluster_subsample(data, &sample_idx, &feature_idx, cfg, seed) {
            Ok(labels) => {
                let mut mask = vec![false; n];
                for &i in &sample_idx {
                    mask[i] = true;
                }
                return Ok(EnsembleInstance {
                    mask,
                    labels,
                    seed,
                    resample_fraction: cfg.resample_fraction,
                    feature_subset: feature_idx,
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

/// Generates `cfg.size` independent clustering instances. Instance `b` is a
/// pure function of `(data, cfg, child_seed(master_seed, b))`, so the output
/// is identical at any parallelism level.
pub fn generate_ensemble(data: &ViewSet, cfg: &EnsembleConfig) -> Result<Vec<EnsembleInstance>> {
    if cfg.size == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }
    if !(cfg.resample_fraction > 0.0 && cfg.resample_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "resample_fraction must lie in (0, 1], got {}",
            cfg.resample_fraction
        )));
    }
    if !(cfg.feature_fraction > 0.0 && cfg.feature_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "feature_fraction must lie in (0, 1], got {}",
            cfg.feature_fraction
        )));
    }
    (0..cfg.size as u64)
        .into_par_iter()
        .map(|b| generate_instance(data, cfg, b))
        .collect()
}

/// Pair co-clustering frequencies over an ensemble.
#[derive(Debug, Clone)]
pub struct ConsensusMatrix {
    n: usize,
    /// Times the pair was placed in the same cluster.
    pub together: Vec<u32>,
    /// Times the pair was co-sampled.
    pub cosample: Vec<u32>,
    /// together / cosample, 0 where the pair was never co-sampled.
    pub values: SymmetricMatrix,
}

impl ConsensusMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn together_at(&self, i: usize, j: usize) -> u32 {
        self.together[i * self.n + j]
    }

    pub fn cosample_at(&self, i: usize, j: usize) -> u32 {
        self.cosample[i * self.n + j]
    }

    /// True when the pair never appeared in the same instance (its value is
    /// 0 by convention rather than by observation).
    pub fn never_cosampled(&self, i: usize, j: usize) -> bool {
        i != j && self.cosample_at(i, j) == 0
    }
}

/// Counts co-sampling and co-clustering over all pairs. The per-instance
/// counts are summed with integer addition, so any reduction order gives the
/// same matrix.
pub fn consensus_matrix(ensemble: &[EnsembleInstance]) -> Result<ConsensusMatrix> {
    let Some(first) = ensemble.first() else {
        return Err(Error::Data("empty ensemble".into()));
    };
    let n = first.mask.len();
    if ensemble.iter().any(|inst| inst.mask.len() != n) {
        return Err(Error::Data("ensemble instances disagree on sample count".into()));
    }

    let (together, cosample) = ensemble
        .par_iter()
        .fold(
            || (vec![0u32; n * n], vec![0u32; n * n]),
            |(mut tog, mut cos), inst| {
                let included: Vec<usize> = inst
                    .mask
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &m)| m.then_some(i))
                    .collect();
                let labels = inst.labels.labels();
                for (a, &i) in included.iter().enumerate() {
                    for (b, &j) in included.iter().enumerate().skip(a) {
                        cos[i * n + j] += 1;
                        if labels[a] == labels[b] {
                            tog[i * n + j] += 1;
                        }
                    }
                }
                (tog, cos)
            },
        )
        .reduce(
            || (vec![0u32; n * n], vec![0u32; n * n]),
            |(mut ta, mut ca), (tb, cb)| {
                for (x, y) in ta.iter_mut().zip(&tb) {
                    *x += y;
                }
                for (x, y) in ca.iter_mut().zip(&cb) {
                    *x += y;
                }
                (ta, ca)
            },
        );

    // mirror the upper triangle
    let mut together = together;
    let mut cosample = cosample;
    for i in 0..n {
        for j in (i + 1)..n {
            together[j * n + i] = together[i * n + j];
            cosample[j * n + i] = cosample[i * n + j];
        }
    }
    let values = SymmetricMatrix::from_fn(n, |i, j| {
        let c = cosample[i * n + j];
        if c > 0 {
            together[i * n + j] as f64 / c as f64
        } else {
            0.0
        }
    });
    Ok(ConsensusMatrix {
        n,
        together,
        cosample,
        values,
    })
}

/// Empirical CDF of the off-diagonal consensus indices.
#[derive(Debug, Clone)]
pub struct CdfCurve {
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
    /// Mean slope over [0.1, 0.9]: `(cdf(0.9) - cdf(0.1)) / 0.8`.
    pub flatness: f64,
    /// Area under the curve on [0, 1].
    pub area: f64,
}

fn interpolate(grid: &[f64], cdf: &[f64], x: f64) -> f64 {
    match grid.iter().position(|&g| g >= x) {
        Some(0) => cdf[0],
        Some(p) => {
            let (g0, g1) = (grid[p - 1], grid[p]);
            let t = (x - g0) / (g1 - g0);
            cdf[p - 1] + t * (cdf[p] - cdf[p - 1])
        }
        None => *cdf.last().unwrap(),
    }
}

/// CDF over a uniform grid on [0, 1]; only pairs that were co-sampled at
/// least once contribute.
pub fn consensus_cdf(m: &ConsensusMatrix, grid_points: usize) -> Result<CdfCurve> {
    if grid_points < 2 {
        return Err(Error::Config("CDF grid needs at least 2 points".into()));
    }
    let n = m.n();
    let mut indices = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if m.cosample_at(i, j) > 0 {
                indices.push(m.values.get(i, j));
            }
        }
    }
    if indices.is_empty() {
        return Err(Error::Data("no co-sampled pairs; cannot form a consensus CDF".into()));
    }
    indices.sort_by(f64::total_cmp);
    let grid: Vec<f64> = (0..grid_points)
        .map(|g| g as f64 / (grid_points - 1) as f64)
        .collect();
    let total = indices.len() as f64;
    let cdf: Vec<f64> = grid
        .iter()
        .map(|&x| indices.partition_point(|&v| v <= x) as f64 / total)
        .collect();
    let flatness = (interpolate(&grid, &cdf, 0.9) - interpolate(&grid, &cdf, 0.1)) / 0.8;
    let area = grid
        .windows(2)
        .zip(cdf.iter().skip(1))
        .map(|(w, &c)| (w[1] - w[0]) * c)
        .sum();
    Ok(CdfCurve {
        grid,
        cdf,
        flatness,
        area,
    })
}

/// Diagnostics for one candidate K.
#[derive(Debug, Clone)]
pub struct KEntry {
    pub k: usize,
    pub matrix: ConsensusMatrix,
    pub curve: CdfCurve,
    /// Relative increase in area under the CDF from the previous K
    /// (the area itself for the first K in the range).
    pub delta_area: f64,
}

#[derive(Debug, Clone)]
pub struct KSelectionReport {
    pub entries: Vec<KEntry>,
    pub chosen_k: usize,
    pub tau: f64,
}

/// Default elbow threshold on the relative area increase. Below the true K
/// every additional cluster reshuffles many pairs and the area under the CDF
/// jumps by 20% or more; past it the increases settle well under 10%.
pub const DEFAULT_DELTA_AREA_TAU: f64 = 0.1;

/// Number of grid points used for all consensus CDFs (hits 0.1 and 0.9
/// exactly).
pub const CDF_GRID_POINTS: usize = 101;

/// Searches the given K range with one consensus run per K and picks the
/// elbow of the delta-area curve: the largest K whose relative area increase
/// still exceeds `tau`. Full per-K diagnostics are returned so the choice can
/// be overridden by inspection.
pub fn select_k(
    data: &ViewSet,
    k_range: &[usize],
    cfg: &EnsembleConfig,
    tau: f64,
) -> Result<KSelectionReport> {
    let mut ks: Vec<usize> = k_range.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::Config("empty K range".into()));
    }
    let n = data.n_samples();
    if ks[0] < 2 || *ks.last().unwrap() > n.saturating_sub(1) {
        return Err(Error::Config(format!(
            "K range must lie within 2..={} for {n} samples",
            n - 1
        )));
    }

    let mut entries: Vec<KEntry> = Vec::with_capacity(ks.len());
    for &k in &ks {
        let mut kc = cfg.clone();
        kc.k = k;
        kc.master_seed = child_seed(cfg.master_seed, k as u64);
        let ensemble = generate_ensemble(data, &kc)?;
        let matrix = consensus_matrix(&ensemble)?;
        let curve = consensus_cdf(&matrix, CDF_GRID_POINTS)?;
        let delta_area = match entries.last() {
            None => curve.area,
            Some(prev) if prev.curve.area > 0.0 => {
                (curve.area - prev.curve.area) / prev.curve.area
            }
            Some(_) => curve.area,
        };
        entries.push(KEntry {
            k,
            matrix,
            curve,
            delta_area,
        });
    }

    let chosen_k = entries
        .iter()
        .filter(|e| e.delta_area > tau)
        .map(|e| e.k)
        .next_back()
        .unwrap_or(ks[0]);
    Ok(KSelectionReport {
        entries,
        chosen_k,
        tau,
    })
}

/// Final membership from the consensus matrix: spectral clustering with the
/// consensus values as the affinity matrix (diagonal zeroed first).
pub fn consensus_partition(
    m: &ConsensusMatrix,
    k: usize,
    seed: u64,
) -> Result<ClusterAssignment> {
    let n = m.n();
    let affinity = SymmetricMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { m.values.get(i, j) });
    crate::spectral::spectral(&affinity, k, seed)
}
