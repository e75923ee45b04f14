//! Kernel timings on one worker thread versus the default rayon pool.
//! Built without the `parallel` feature, only the sequential variants run.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graftab::nfa::compute_nfa;
use graftab::pearl::{init_weights, pearl_encode, PearlConfig};
use graftab::predict::{Knn, PredictRequest, Predictor, TrainLabels};
use graftab::structural::{laplacian_eigenvectors, pagerank, StructuralConfig};
use graftab::{Column, FeatureTable, Graph, TaskKind};

fn random_graph(n: usize, mean_degree: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = (0..n * mean_degree / 2).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
    Graph::from_edges(n, edges).unwrap().0
}

fn features(n: usize, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (0..8)
        .map(|c| Column::numerical(format!("x{c}"), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    FeatureTable::new(n, cols).unwrap()
}

fn knn_request(n_train: usize, n_test: usize, d: usize) -> PredictRequest {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let train = Array2::from_shape_fn((n_train, d), |_| rng.random_range(-1.0..1.0));
    let test = Array2::from_shape_fn((n_test, d), |_| rng.random_range(-1.0..1.0));
    let y = TrainLabels::Classes((0..n_train).map(|i| (i % 2) as u32).collect());
    PredictRequest::new(train, y, test, TaskKind::Binary, 2).unwrap()
}

/// Runs `f` on a dedicated pool of `threads` workers, or inline when sequential.
fn on_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            b = b.num_threads(t);
        }
        b.build().unwrap().install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

fn pools() -> Vec<(&'static str, Option<usize>)> {
    if cfg!(feature = "parallel") {
        vec![("1-thread", Some(1)), ("default-pool", None)]
    } else {
        vec![("sequential", Some(1))]
    }
}

fn kernels(c: &mut Criterion) {
    let g = random_graph(50_000, 10, 1);
    let x = features(50_000, 2);
    let small = random_graph(5_000, 8, 4);
    let cfg = StructuralConfig {
        dense_limit: 0,
        ..Default::default()
    };
    let pcfg = PearlConfig {
        m_draws: 8,
        ..Default::default()
    };
    let w = init_weights(&pcfg).unwrap();
    let req = knn_request(4_000, 2_000, 32);
    let knn = Knn::default();

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (label, threads) in pools() {
        group.bench_function(BenchmarkId::new("nfa_50k", label), |b| {
            b.iter(|| on_pool(threads, || compute_nfa(&g, &x).unwrap()))
        });
        group.bench_function(BenchmarkId::new("pagerank_50k", label), |b| {
            b.iter(|| on_pool(threads, || pagerank(&g, &cfg).unwrap()))
        });
        group.bench_function(BenchmarkId::new("lanczos_k8_5k", label), |b| {
            b.iter(|| on_pool(threads, || laplacian_eigenvectors(&small, &cfg).unwrap()))
        });
        group.bench_function(BenchmarkId::new("pearl_m8_50k", label), |b| {
            b.iter(|| on_pool(threads, || pearl_encode(&g, &pcfg, &w).unwrap()))
        });
        group.bench_function(BenchmarkId::new("knn_4k_x_2k", label), |b| {
            b.iter(|| on_pool(threads, || knn.predict(&req).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
