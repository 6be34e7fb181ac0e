//! Shared fixtures for the criterion benchmarks.

use omiclust_core::ingest::ViewSet;
use omiclust_core::synth::{generate, SyntheticSpec};
use omiclust_core::{pairwise_distances, ClusterAssignment, Matrix, Metric, SymmetricMatrix};

/// A planted 4-cluster dataset sized for steady benchmark runtimes.
pub fn planted(n_per_cluster: usize, dims: usize, views: usize) -> (ViewSet, ClusterAssignment) {
    let spec = SyntheticSpec {
        k: 4,
        n_per_cluster,
        dims,
        separation: 8.0,
        views,
        noise_views: 0,
        seed: 99,
    };
    generate(&spec).expect("benchmark fixture generation failed")
}

pub fn stacked(views: &ViewSet) -> Matrix {
    views.stacked_matrix().expect("stacking benchmark fixture failed")
}

pub fn distances(views: &ViewSet) -> SymmetricMatrix {
    pairwise_distances(&stacked(views), Metric::Euclidean)
        .expect("distance computation on benchmark fixture failed")
}
