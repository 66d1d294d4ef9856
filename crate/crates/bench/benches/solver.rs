use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use msp_bench::fixture;
use msp_core::estimators::fit_lasso;
use msp_core::{kkt_check, PenaltySpec, Scenario, SolverOptions};

fn lasso_single(c: &mut Criterion) {
    let mut group = c.benchmark_group("lasso_cold");
    for p in [50, 500, 5000] {
        let f = fixture(Scenario::Toeplitz, 100, p, 100);
        let lambda = f.grid[30];
        group.bench_with_input(BenchmarkId::from_parameter(p), &lambda, |b, &l| {
            b.iter(|| fit_lasso(&f.design, f.y.view(), black_box(l), &SolverOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn kkt(c: &mut Criterion) {
    let f = fixture(Scenario::Independent, 200, 2000, 100);
    let penalty = PenaltySpec::unit(f.grid[20], 2000).unwrap();
    let fit = fit_lasso(&f.design, f.y.view(), f.grid[20], &SolverOptions::default()).unwrap();
    c.bench_function("kkt_check_200x2000", |b| {
        b.iter(|| kkt_check(&f.design, f.y.view(), &penalty, black_box(&fit.coefs)))
    });
}

criterion_group!(benches, lasso_single, kkt);
criterion_main!(benches);
