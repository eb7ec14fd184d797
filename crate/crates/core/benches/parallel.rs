use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use disasm_core::ccc::initialize_population_with;
use disasm_core::moga::{evolve, GaConfig};
use disasm_core::schedule::{build_instance, oracle_solve};
use disasm_core::sequence::SequenceProblem;
use disasm_core::{fixtures, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_init(c: &mut Criterion) {
    let mut group = c.benchmark_group("ccc_init");
    let model = fixtures::generate(60, 7);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 60), &exec, |b, &exec| {
            b.iter(|| initialize_population_with(black_box(&model), 200, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("sequence_ga");
    let model = fixtures::generate(24, 1005);
    let problem = SequenceProblem { model: &model, salt: 1 };
    for (name, exec) in MODES {
        let config = GaConfig {
            population_size: 40,
            generations: 3,
            rng_seed: 3,
            execution: exec,
            ..GaConfig::default()
        };
        group.bench_with_input(BenchmarkId::new(name, 24), &config, |b, config| {
            b.iter(|| evolve(&problem, config).unwrap())
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_sweep");
    let instances: Vec<_> = (0..200)
        .map(|seed| build_instance(&fixtures::random_jobs(seed, 6), false).unwrap())
        .collect();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, instances.len()), &exec, |b, &exec| {
            b.iter(|| exec.map(&instances, |inst| oracle_solve(inst, u64::MAX).unwrap().makespan_ms))
        });
    }
    group.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_init, bench_evaluation, bench_oracle,
);
criterion_main!(benches);
