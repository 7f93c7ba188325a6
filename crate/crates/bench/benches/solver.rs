use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fbp_bench::{mms_config, template_config};
use fbp_core::fracmem::{history_sum, history_weights, FractionalWeights, HistoryCache};
use fbp_core::{run_simulation, Problem, TrialBasis};

fn basis(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial_basis");
    for n in [20, 60, 100] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| TrialBasis::new(black_box(n)).unwrap())
        });
    }
    group.finish();
}

fn history(c: &mut Criterion) {
    let n = 3000;
    let nodes = 21;
    let w = FractionalWeights::new(0.1, 1.0 / n as f64, n, false).unwrap();
    let hw = history_weights(n, &w).unwrap();
    let entries: Vec<Vec<f64>> = (0..n).map(|k| vec![k as f64 * 1e-3; nodes]).collect();
    c.bench_function("history_sum_3000x21", |b| {
        let mut cache = HistoryCache::from_entries(entries.clone());
        b.iter(|| history_sum(&mut cache, black_box(&hw), nodes).unwrap())
    });
}

fn runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    group.bench_function("mms_m200_n20", |b| {
        let cfg = mms_config(200, 20);
        b.iter(|| run_simulation(Problem::from_config(&cfg).unwrap()).unwrap())
    });
    group.bench_function("template_m200", |b| {
        let cfg = template_config(200);
        b.iter(|| run_simulation(Problem::from_config(&cfg).unwrap()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, basis, history, runs);
criterion_main!(benches);
