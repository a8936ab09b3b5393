use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fbheat::diagnostics::inverse_singular_values;
use fbheat::evolve::propagator_norm_growth_with;
use fbheat::grid::{EpsilonParam, PeriodicGridFunction};
use fbheat::invsolve::{column_norm_decay_with, solve_explicit_with};
use fbheat::spectrum::{stabilized_spectrum_with, PrecisionMode};
use fbheat::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench(c: &mut Criterion) {
    let eps = EpsilonParam::new(0.5).unwrap();
    let f = PeriodicGridFunction::from_real_fn(256, |t| (3.0 * t).sin() - 0.25 * (2.0 * t).cos()).unwrap();

    let mut g = c.benchmark_group("throughput");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("explicit_solve", name), &exec, |b, &e| {
            b.iter(|| solve_explicit_with(&f, eps, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("inverse_columns_512", name), &exec, |b, &e| {
            b.iter(|| column_norm_decay_with(eps, 512, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("inverse_svd_128", name), &exec, |b, &e| {
            b.iter(|| inverse_singular_values(eps, 128, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("propagator_norms", name), &exec, |b, &e| {
            b.iter(|| propagator_norm_growth_with(eps, 1.0, &[16, 32, 64], e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("spectrum_64", name), &exec, |b, &e| {
            b.iter(|| stabilized_spectrum_with(eps, 64, PrecisionMode::Standard, 20, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
