//! Planted-partition data generator used for ground-truth testing.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::assignment::ClusterAssignment;
use crate::error::{Error, Result};
use crate::ingest::{merge_views, ExpressionMatrix, View, ViewSet};

/// Description of a synthetic multi-view dataset with known labels.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub k: usize,
    pub n_per_cluster: usize,
    pub dims: usize,
    /// Center spacing in units of the within-cluster standard deviation
    /// (which is 1, isotropic).
    pub separation: f64,
    pub views: usize,
    /// How many of the views are pure noise (no cluster signal).
    pub noise_views: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n_per_cluster == 0 || self.dims == 0 || self.views == 0 {
            return Err(Error::Config(
                "k, n_per_cluster, dims, and views must all be positive".into(),
            ));
        }
        if !(self.separation > 0.0) {
            return Err(Error::Config(format!(
                "separation must be positive, got {}",
                self.separation
            )));
        }
        if self.noise_views > self.views {
            return Err(Error::Config(format!(
                "noise_views = {} exceeds views = {}",
                self.noise_views, self.views
            )));
        }
        Ok(())
    }
}

const CENTER_RETRIES: usize = 200;

/// Cluster centers with pairwise distance >= separation. Placed on scaled
/// basis vectors when they fit (deterministic), otherwise by rejection
/// sampling.
fn place_centers(
    k: usize,
    dims: usize,
    separation: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    if k == 1 {
        return Ok(vec![vec![0.0; dims]]);
    }
    if k <= dims {
        // pairwise distance between scaled basis vectors is s*sqrt(2)
        let scale = separation / std::f64::consts::SQRT_2;
        return Ok((0..k)
            .map(|c| {
                let mut v = vec![0.0; dims];
                v[c] = scale;
                v
            })
            .collect());
    }
    // too many clusters for the simplex trick: rejection-sample on a box
    let box_half = separation * (k as f64).cbrt();
    for _ in 0..CENTER_RETRIES {
        let centers: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                (0..dims)
                    .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * box_half)
                    .collect()
            })
            .collect();
        let ok = (0..k).all(|a| {
            ((a + 1)..k).all(|b| {
                crate::distance::euclidean(&centers[a], &centers[b]) >= separation
            })
        });
        if ok {
            return Ok(centers);
        }
    }
    Err(Error::Numeric(format!(
        "could not place {k} centers at separation {separation} in {dims} dimensions"
    )))
}

/// Draws the dataset: `k * n_per_cluster` samples per view, unit isotropic
/// noise around each center in informative views, pure noise in the rest.
/// The last `noise_views` views are the noise ones. Deterministic per seed.
pub fn generate(spec: &SyntheticSpec) -> Result<(ViewSet, ClusterAssignment)> {
    spec.validate()?;
    let n = spec.k * spec.n_per_cluster;
    let labels: Vec<usize> = (0..n).map(|i| i / spec.n_per_cluster).collect();
    let sample_ids: Vec<String> = (0..n).map(|i| format!("S{i:05}")).collect();

    let mut views = Vec::with_capacity(spec.views);
    for v in 0..spec.views {
        let informative = v < spec.views - spec.noise_views;
        let mut rng = ChaCha8Rng::seed_from_u64(crate::consensus::child_seed(spec.seed, v as u64));
        let centers = if informative {
            Some(place_centers(spec.k, spec.dims, spec.separation, &mut rng)?)
        } else {
            None
        };
        let mut values = Vec::with_capacity(n * spec.dims);
        for &label in &labels {
            for d in 0..spec.dims {
                let noise: f64 = rng.sample(StandardNormal);
                let center = centers.as_ref().map_or(0.0, |c| c[label][d]);
                values.push(center + noise);
            }
        }
        let feature_ids: Vec<String> = (0..spec.dims).map(|d| format!("V{v}_F{d:04}")).collect();
        views.push(View {
            name: format!("view{v}"),
            data: ExpressionMatrix::new(sample_ids.clone(), feature_ids, values)?,
        });
    }
    let viewset = merge_views(views)?;
    Ok((viewset, ClusterAssignment::from_labels(&labels)?))
}
