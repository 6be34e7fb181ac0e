use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use omiclust_bench::{distances, planted, stacked};
use omiclust_core::consensus::{consensus_matrix, generate_ensemble, BaseAlgorithm, EnsembleConfig};
use omiclust_core::snf::{snf_affinity, snf_fuse, SnfParams};
use omiclust_core::{
    hierarchical, kmeans, symmetric_eigen, KMeansConfig, Linkage, SymmetricMatrix, Which,
};

fn bench_kmeans(c: &mut Criterion) {
    let (views, _) = planted(50, 20, 1);
    let x = stacked(&views);
    c.bench_function("kmeans_200x20_k4", |b| {
        b.iter(|| kmeans(black_box(&x), &KMeansConfig::new(4, 7)).unwrap())
    });
}

fn bench_hierarchical(c: &mut Criterion) {
    let (views, _) = planted(50, 20, 1);
    let d = distances(&views);
    c.bench_function("hierarchical_average_200", |b| {
        b.iter(|| hierarchical(black_box(&d), Linkage::Average).unwrap())
    });
}

fn bench_eigen(c: &mut Criterion) {
    let (views, _) = planted(25, 20, 1);
    let d = distances(&views);
    let a = SymmetricMatrix::from_fn(d.n(), |i, j| {
        if i == j {
            0.0
        } else {
            (-d.get(i, j) * d.get(i, j) / 50.0).exp()
        }
    });
    let l = omiclust_core::normalized_laplacian(&a).unwrap();
    c.bench_function("eigen_smallest4_100", |b| {
        b.iter(|| symmetric_eigen(black_box(&l), 4, Which::Smallest).unwrap())
    });
}

fn bench_snf_fuse(c: &mut Criterion) {
    let (views, _) = planted(25, 20, 2);
    let params = SnfParams::defaults_for(views.n_samples());
    let affinities: Vec<SymmetricMatrix> = views
        .views()
        .iter()
        .map(|v| {
            let d = omiclust_core::pairwise_distances(
                &v.data.to_matrix().unwrap(),
                omiclust_core::Metric::Euclidean,
            )
            .unwrap();
            snf_affinity(&d, params.k_neighbors, params.mu).unwrap()
        })
        .collect();
    c.bench_function("snf_fuse_100x2_20iter", |b| {
        b.iter_batched(
            || affinities.clone(),
            |a| snf_fuse(black_box(&a), params.k_neighbors, params.iterations).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_consensus(c: &mut Criterion) {
    let (views, _) = planted(25, 10, 1);
    let cfg = EnsembleConfig::new(BaseAlgorithm::KMeans, 4, 50, 7);
    c.bench_function("consensus_kmeans_100_size50", |b| {
        b.iter(|| {
            let ensemble = generate_ensemble(black_box(&views), &cfg).unwrap();
            consensus_matrix(&ensemble).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_kmeans,
    bench_hierarchical,
    bench_eigen,
    bench_snf_fuse,
    bench_consensus
);
criterion_main!(benches);
