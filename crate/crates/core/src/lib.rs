//! Clustering toolkit for subgroup discovery in high-dimensional, multi-view
//! expression matrices.
//!
//! The library provides:
//!
//! * matrix primitives: pairwise distances, normalized graph Laplacian, and
//!   symmetric eigendecomposition ([`matrix`], [`distance`], [`eigen`]);
//! * ingestion of TSV/CSV expression data with multi-view merging and
//!   variance-based feature selection ([`ingest`]);
//! * base clustering algorithms: k-means, agglomerative hierarchical with
//!   dendrogram cutting, and spectral clustering ([`kmeans`], [`hierarchy`],
//!   [`spectral`]);
//! * similarity network fusion across views ([`snf`]);
//! * resampling-based consensus clustering with consensus-matrix/CDF model
//!   selection ([`consensus`]);
//! * validity measures: silhouette widths, ASW, adjusted Rand index
//!   ([`metrics`]);
//! * a planted-partition generator for ground-truth experiments ([`synth`]).
//!
//! All randomized routines take an explicit seed and are deterministic for a
//! fixed seed at any parallelism level.

pub mod assignment;
pub mod consensus;
pub mod distance;
pub mod eigen;
pub mod error;
pub mod hierarchy;
pub mod ingest;
pub mod kmeans;
pub mod matrix;
pub mod metrics;
pub mod snf;
pub mod spectral;
pub mod synth;

pub use assignment::ClusterAssignment;
pub use consensus::{
    child_seed, consensus_cdf, consensus_matrix, consensus_partition, generate_ensemble,
    select_k, BaseAlgorithm, CdfCurve, ConsensusMatrix, EnsembleConfig, EnsembleInstance,
    KSelectionReport,
};
pub use distance::{pairwise_distances, Metric};
pub use eigen::{normalized_laplacian, symmetric_eigen, EigenPairs, Which};
pub use error::{Error, Result};
pub use hierarchy::{cut_dendrogram, hierarchical, Dendrogram, Linkage};
pub use ingest::{
    load_expression_matrix, merge_views, select_by_variance, write_expression_matrix,
    ExpressionMatrix, Orientation, SelectionReport, View, ViewSet,
};
pub use kmeans::{kmeans, Init, KMeansConfig, KMeansResult};
pub use matrix::{Matrix, SymmetricMatrix};
pub use metrics::{adjusted_rand_index, asw, reorder_for_heatmap, silhouette_widths, SilhouetteReport};
pub use snf::{snf_affinity, snf_cluster, snf_fuse, FusedNetwork, SnfParams};
pub use spectral::{gaussian_affinity, spectral, spectral_embedding, AffinityScale};
pub use synth::{generate, SyntheticSpec};
