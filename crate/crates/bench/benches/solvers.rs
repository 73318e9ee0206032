use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dfrelay::dual_bound::dual_optimum;
use dfrelay::oracle::exhaustive_total;
use dfrelay::{solve_extra_total, solve_individual, solve_total, waterfill, IndividualBudgets, PowerConstraint, WaterfillProblem};
use dfrelay_bench::{fixed_iterations, instance};

fn bench_waterfill(c: &mut Criterion) {
    let mut g = c.benchmark_group("waterfill");
    for n in [16, 128, 1024] {
        let real = instance(n, 1);
        let prob = WaterfillProblem::new(real.a_sr.clone(), real.w.clone(), 5.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &prob, |b, p| b.iter(|| waterfill(black_box(p))));
    }
    g.finish();
}

fn bench_dual_iterations(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_total_200_iterations");
    g.sample_size(20);
    let cfg = fixed_iterations(200);
    for m in [8, 16, 32, 64] {
        let real = instance(m, 2);
        g.bench_with_input(BenchmarkId::from_parameter(m), &real, |b, r| {
            b.iter(|| solve_total(black_box(r), 5.0, &cfg, 0).unwrap())
        });
    }
    g.finish();
}

fn bench_full_runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("full_run_m16");
    g.sample_size(10);
    let real = instance(16, 3);
    let cfg = Default::default();
    let budgets = IndividualBudgets { source: 4.0, relay: 1.0 };
    g.bench_function("total", |b| b.iter(|| solve_total(&real, 5.0, &cfg, 0).unwrap()));
    g.bench_function("individual", |b| b.iter(|| solve_individual(&real, &budgets, &cfg, 0).unwrap()));
    g.bench_function("extra_total", |b| b.iter(|| solve_extra_total(&real, 5.0, &cfg, 0).unwrap()));
    g.finish();
}

fn bench_references(c: &mut Criterion) {
    let mut g = c.benchmark_group("references");
    g.sample_size(10);
    let small = instance(6, 4);
    g.bench_function("exhaustive_total_m6", |b| b.iter(|| exhaustive_total(&small, 5.0).unwrap()));
    let real = instance(16, 4);
    g.bench_function("dual_optimum_total_m16", |b| {
        b.iter(|| dual_optimum(&real, &PowerConstraint::Total(5.0), false).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_waterfill, bench_dual_iterations, bench_full_runs, bench_references);
criterion_main!(benches);
