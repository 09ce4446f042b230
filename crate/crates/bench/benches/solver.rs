use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use covns_core::benchgen::{generate_base, GenSpec};
use covns_core::operators::{apply_operator, OperatorKind};
use covns_core::stats::{friedman_ranks, holm_posthoc, reference};
use covns_core::vns::{solve_svns, VnsConfig};
use covns_core::{Partition, WeightedDigraph};

fn benchmark_graph(node_count: usize) -> WeightedDigraph {
    let spec = GenSpec {
        base_node_count: node_count,
        seed: 1,
        ..GenSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    generate_base(&spec, &mut rng).unwrap().0
}

fn bench_modularity(c: &mut Criterion) {
    let graph = benchmark_graph(100);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let partition = Partition::random(100, &mut rng).unwrap();
    c.bench_function("modularity_v100", |b| {
        b.iter(|| graph.modularity(black_box(&partition)).unwrap())
    });
    c.bench_function("modularity_delta_v100", |b| {
        b.iter(|| graph.modularity_delta(black_box(&partition), 42, 1).unwrap())
    });
}

fn bench_operators(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let partition = Partition::random(100, &mut rng).unwrap();
    c.bench_function("apply_operator_cc3_v100", |b| {
        b.iter(|| apply_operator(OperatorKind::Cc3, black_box(&partition), &mut rng))
    });
}

fn bench_solver(c: &mut Criterion) {
    let graph = benchmark_graph(50);
    c.bench_function("svns_v50_2000_evals", |b| {
        b.iter(|| solve_svns(black_box(&graph), &VnsConfig::new(10, 2000, 7)).unwrap())
    });
}

fn bench_stats(c: &mut Criterion) {
    let means: Vec<Vec<f64>> = reference::OI_MEANS.iter().map(|r| r.to_vec()).collect();
    let names: Vec<String> = reference::ALGORITHMS.iter().map(|s| s.to_string()).collect();
    c.bench_function("friedman_holm_3x11", |b| {
        b.iter(|| {
            let ranks = friedman_ranks(black_box(&means)).unwrap();
            holm_posthoc(&ranks, &names, 11, "covns").unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_modularity,
    bench_operators,
    bench_solver,
    bench_stats
);
criterion_main!(benches);
