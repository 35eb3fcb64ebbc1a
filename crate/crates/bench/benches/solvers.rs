use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tpt_bench::{banded_chain, ring_sets, triple_well_chain};
use tpt_core::analysis::analyze;
use tpt_core::chain::{stationary_distribution, ChainSpec};
use tpt_core::committor::{solve_periodic, solve_stationary, PeriodicMethod};
use tpt_core::tolerance::Tolerances;
use tpt_core::ulam::{estimate_transition_matrix, LangevinSpec, UlamGrid};

fn stationary(c: &mut Criterion) {
    let tol = Tolerances::default();
    let (p, sets) = triple_well_chain(500);
    c.bench_function("stationary_distribution/triple_well_300", |b| {
        b.iter(|| stationary_distribution(black_box(&p), &tol).unwrap())
    });
    c.bench_function("committor/triple_well_300", |b| b.iter(|| solve_stationary(black_box(&p), &sets, &tol).unwrap()));
    let window = ChainSpec::finite_homogeneous(&p, 100, stationary_distribution(&p, &tol).unwrap());
    c.bench_function("analyze/triple_well_window_100", |b| {
        b.iter(|| analyze(black_box(&window), &sets, PeriodicMethod::Augmented, &tol).unwrap())
    });
}

fn periodic(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("periodic_committor");
    for n in [50usize, 200] {
        let family: Vec<_> = (0..6).map(|m| banded_chain(n, 2, m as f64)).collect();
        let sets = ring_sets(n);
        for method in [PeriodicMethod::Stacked, PeriodicMethod::Augmented] {
            group.bench_with_input(BenchmarkId::new(format!("{method:?}"), n), &family, |b, f| {
                b.iter(|| solve_periodic(black_box(f), &sets, method, &tol).unwrap())
            });
        }
    }
    group.finish();
}

fn ulam(c: &mut Criterion) {
    let grid = UlamGrid::new([-2.0, 2.0], [-1.0, 2.0], 0.5).unwrap();
    let spec = LangevinSpec::triple_well(1.0, 0.3, 200);
    c.bench_function("ulam_estimate/48_cells_200_samples", |b| {
        b.iter(|| estimate_transition_matrix(black_box(&grid), &spec, 0.0, 1).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = stationary, periodic, ulam
}
criterion_main!(benches);
