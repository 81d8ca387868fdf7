use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eliot_core::arxiv::ArxivClient;
use eliot_core::cluster::ClusterAlgorithm;
use eliot_core::exec::Execution;
use eliot_core::explorer::parse_date_bound;
use eliot_core::reduce::{knn_graph, pairwise_distances, DistanceMetric, ReductionMethod};
use eliot_core::sweep::{run_sweep, SweepCorpus, SweepGrid, SweepOptions};
use eliot_core::text::Representation;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn points(n: usize, d: usize) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0))
}

fn distances(c: &mut Criterion) {
    let x = points(300, 384);
    let mut g = c.benchmark_group("pairwise_distances");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| pairwise_distances(black_box(&x), DistanceMetric::Cosine, exec))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("knn_graph");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| knn_graph(black_box(&x), 15, DistanceMetric::Cosine, exec).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/arxiv");
    let spec = eliot_core::arxiv::QuerySpec::new(["large language models"])
        .with_category("cs")
        .with_dates(parse_date_bound("2024-04", false).ok(), parse_date_bound("2026-04", true).ok());
    let snapshot = ArxivClient::fixture(dir).fetch(&spec).unwrap();
    let corpus = SweepCorpus::from_snapshot("fixture", &snapshot).unwrap();
    let grid = SweepGrid {
        representations: vec![Representation::Tfidf],
        reducers: vec![ReductionMethod::Svd, ReductionMethod::Umap],
        components: vec![5],
        algorithms: vec![ClusterAlgorithm::Kmeans, ClusterAlgorithm::AgglomerativeWard],
        ks: vec![3, 5, 8],
        seeds: vec![42],
    };
    let mut g = c.benchmark_group("small_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = SweepOptions {
            exec,
            ..SweepOptions::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| run_sweep(&corpus, &grid, opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, distances, sweep);
criterion_main!(benches);
