use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use regint_bench::{complex_matrix, extension_problem, nonneg_matrix};
use regint_core::calderon::calderon_norm;
use regint_core::extension::{extension_bracket, Budget};
use regint_core::hardy::{hardy_trial, HardyConfig};
use regint_core::norms::nonneg_operator_p_norm;
use regint_core::ExponentSpec;

fn power_iteration(c: &mut Criterion) {
    let mut group = c.benchmark_group("nonneg_operator_p_norm");
    for n in [4, 16, 64] {
        let m = nonneg_matrix(n, 1);
        let p = ExponentSpec::from_p(3.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| nonneg_operator_p_norm(black_box(m), p, 1e-9).unwrap())
        });
    }
    group.finish();
}

fn calderon(c: &mut Criterion) {
    let mut group = c.benchmark_group("calderon_norm");
    for n in [2, 4, 6] {
        let a = complex_matrix(n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| calderon_norm(black_box(a), 0.5, 1e-6).unwrap())
        });
    }
    group.finish();
}

fn extension(c: &mut Criterion) {
    let mut group = c.benchmark_group("extension_bracket");
    group.sample_size(10);
    for p in [1.0, 2.0, 3.0] {
        let prob = extension_problem(4, 2, 3, p, 3);
        group.bench_with_input(BenchmarkId::from_parameter(p), &prob, |b, prob| {
            b.iter(|| extension_bracket(black_box(prob), 1e-6, Budget(1)).unwrap())
        });
    }
    group.finish();
}

fn hardy(c: &mut Criterion) {
    let config = HardyConfig::new(8, 3, 8, ExponentSpec::from_p(2.0).unwrap(), 1, 4);
    let mut group = c.benchmark_group("hardy_trial");
    group.sample_size(10);
    group.bench_function("random_n8_d3", |b| b.iter(|| hardy_trial(black_box(&config), 0).unwrap()));
    group.finish();
}

criterion_group!(benches, power_iteration, calderon, extension, hardy);
criterion_main!(benches);
