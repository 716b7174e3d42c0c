//! Sequential vs rayon-parallel execution of the batch workloads:
//! brute-force extrema, the QAOA depth search and a batch of training runs.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rlvqc::agent::PpoConfig;
use rlvqc::baseline::{qaoa_search, QaoaConfig};
use rlvqc::exec::ExecMode;
use rlvqc::harness::{build_instance, run_experiment, ExperimentConfig, InstanceId, Method, RunPaths};
use rlvqc::optim::LinearTrustRegion;
use rlvqc::problems::{build_qubo, generate_graph, ProblemKind, TopologyClass};

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn bench_brute_force(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute_force");
    group.sample_size(10);
    for n in [16, 20] {
        let graph = generate_graph(&TopologyClass::ErdosRenyiDense.spec(n)).unwrap().0;
        let q = build_qubo(&graph, ProblemKind::MaxClique).unwrap();
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &q, |b, q| {
                b.iter(|| q.brute_force_extrema(black_box(mode)).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_qaoa_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("qaoa_search");
    group.sample_size(10);
    let q = build_instance(InstanceId {
        problem: ProblemKind::MaxCut,
        topology: TopologyClass::Grid2d,
        n: 8,
    })
    .unwrap();
    let cfg = QaoaConfig {
        search_configs: 8,
        max_evals: 150,
        ..QaoaConfig::default()
    };
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| qaoa_search(&q, &LinearTrustRegion, &cfg, 0, black_box(mode)).unwrap())
        });
    }
    group.finish();
}

fn bench_training_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("training_batch");
    group.sample_size(10);
    let cfg = ExperimentConfig {
        method: Method::RlvqcBlock,
        problems: vec![ProblemKind::MaxCut],
        topologies: vec![TopologyClass::Cycle, TopologyClass::Star],
        sizes: vec![6],
        seeds: vec![0, 1],
        ppo: Some(PpoConfig {
            total_steps: 50,
            ..PpoConfig::block()
        }),
        ..ExperimentConfig::default()
    };
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| run_experiment(&cfg, &RunPaths::default(), black_box(mode)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_brute_force, bench_qaoa_search, bench_training_batch);
criterion_main!(benches);
