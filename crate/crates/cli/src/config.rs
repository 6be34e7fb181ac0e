//! Pipeline configuration: TOML file merged with command-line overrides.
//!
//! Every command writes the fully resolved configuration back into its
//! output directory so a run can be replayed from the artifacts alone.

use std::path::{Path, PathBuf};

use omiclust_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; all randomness in a run derives from it.
    pub seed: u64,
    /// Rayon thread count; 0 leaves the default.
    pub threads: usize,
    pub output_dir: PathBuf,
    /// euclidean | squared_euclidean | correlation
    pub metric: String,
    #[serde(rename = "view")]
    pub views: Vec<ViewConfig>,
    pub cluster: ClusterConfig,
    pub consensus: ConsensusConfig,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: 0,
            output_dir: PathBuf::from("out"),
            metric: "euclidean".into(),
            views: Vec::new(),
            cluster: ClusterConfig::default(),
            consensus: ConsensusConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViewConfig {
    pub path: PathBuf,
    /// features_as_rows | samples_as_rows
    pub orientation: String,
    /// Keep the n_top highest-variance features; 0 keeps all.
    pub n_top: usize,
    /// Defaults to the file stem.
    pub name: Option<String>,
}

impl Default for ViewConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::new(),
            orientation: "features_as_rows".into(),
            n_top: 0,
            name: None,
        }
    }
}

impl ViewConfig {
    pub fn display_name(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => self
                .path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "view".into()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    /// kmeans | hier | spectral | snf
    pub algorithm: String,
    pub k: usize,
    /// single | complete | average
    pub linkage: String,
    /// SNF nearest-neighbour count; 0 derives max(3, round(N/10)).
    pub snf_k_neighbors: usize,
    pub snf_mu: f64,
    pub snf_iterations: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            algorithm: "kmeans".into(),
            k: 2,
            linkage: "average".into(),
            snf_k_neighbors: 0,
            snf_mu: 0.5,
            snf_iterations: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsensusConfig {
    pub ensemble_size: usize,
    pub resample_fraction: f64,
    pub feature_fraction: f64,
    pub k_range: Vec<usize>,
    /// Relative delta-area threshold for K selection.
    pub tau: f64,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 500,
            resample_fraction: 0.8,
            feature_fraction: 1.0,
            k_range: vec![2, 3, 4, 5, 6],
            tau: omiclust_core::consensus::DEFAULT_DELTA_AREA_TAU,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub k: usize,
    pub n_per_cluster: usize,
    pub dims: usize,
    pub separation: f64,
    pub views: usize,
    pub noise_views: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            k: 4,
            n_per_cluster: 50,
            dims: 10,
            separation: 6.0,
            views: 1,
            noise_views: 0,
        }
    }
}

/// Command-line flags that override config-file values; flags win.
#[derive(clap::Args, Debug, Default, Clone)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed for all randomness.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread count (0 = automatic).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// kmeans | hier | spectral | snf
    #[arg(long, global = true)]
    pub algorithm: Option<String>,
    /// Number of clusters.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// K values searched by select-k: "2..6" (inclusive) or "2,3,4".
    #[arg(long, global = true, value_name = "RANGE")]
    pub k_range: Option<String>,
    /// Ensemble size for consensus commands.
    #[arg(long, global = true)]
    pub ensemble_size: Option<usize>,
    /// Sample fraction drawn per ensemble instance.
    #[arg(long, global = true)]
    pub resample_fraction: Option<f64>,
    /// Directory all artifacts are written to.
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
}

pub fn parse_k_range(s: &str) -> Result<Vec<usize>> {
    let bad = |why: &str| Error::Config(format!("invalid k range {s:?}: {why}"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad("bounds must be integers"))?;
        let hi: usize = hi.trim().parse().map_err(|_| bad("bounds must be integers"))?;
        if lo > hi {
            return Err(bad("lower bound exceeds upper bound"));
        }
        Ok((lo..=hi).collect())
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad("entries must be integers")))
            .collect()
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
    }

    /// Loads the config file if given, then layers the flags on top.
    pub fn resolve(overrides: &Overrides) -> Result<Self> {
        let mut cfg = match &overrides.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(threads) = overrides.threads {
            cfg.threads = threads;
        }
        if let Some(algorithm) = &overrides.algorithm {
            cfg.cluster.algorithm = algorithm.clone();
        }
        if let Some(k) = overrides.k {
            cfg.cluster.k = k;
        }
        if let Some(range) = &overrides.k_range {
            cfg.consensus.k_range = parse_k_range(range)?;
        }
        if let Some(size) = overrides.ensemble_size {
            cfg.consensus.ensemble_size = size;
        }
        if let Some(fraction) = overrides.resample_fraction {
            cfg.consensus.resample_fraction = fraction;
        }
        if let Some(dir) = &overrides.output_dir {
            cfg.output_dir = dir.clone();
        }
        Ok(cfg)
    }

    /// Writes the resolved config into `dir` for provenance.
    pub fn write_into(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("cannot serialize config: {e}")))?;
        std::fs::write(dir.join("config.toml"), text)?;
        Ok(())
    }
}
