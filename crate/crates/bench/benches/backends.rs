use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cqed_core::entanglement::pairwise_concurrences;
use cqed_core::evolution::{dissipative_map, initial_state, stage_step, BranchState};
use cqed_core::oracle::fixed_step_evolve;
use cqed_core::{branch_run, run_scenario, Scenario, StageKind, C64};

fn scenario(n: usize) -> Scenario {
    Scenario::experimental()
        .with_amplitudes(C64::from(1.0), C64::from(1.0))
        .with_relative_damping(0.05, 0.05)
        .with_truncation(n, n)
}

fn stage_maps(c: &mut Criterion) {
    let mut group = c.benchmark_group("cavity stage");
    group.sample_size(10);
    for n in [10, 15, 20] {
        let s = scenario(n);
        let rho = initial_state(&s).unwrap();
        group.bench_with_input(BenchmarkId::new("dissipative map", n), &rho, |b, rho| {
            b.iter(|| dissipative_map(black_box(rho), StageKind::Cavity1, 30.0, &s).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dense step", n), &rho, |b, rho| {
            b.iter(|| stage_step(black_box(rho), StageKind::Cavity1, 30.0, &s).unwrap())
        });
    }
    let s = scenario(20);
    let state = BranchState::initial(&s).unwrap();
    group.bench_function("branch step", |b| {
        b.iter(|| black_box(&state).step(StageKind::Cavity1, 30.0, &s).unwrap())
    });
    group.finish();
}

fn full_runs(c: &mut Criterion) {
    let grid = [30.0, 60.0, 90.0];
    let mut group = c.benchmark_group("five-stage run");
    group.sample_size(10);
    let s = scenario(15);
    group.bench_function("dense N=15", |b| b.iter(|| run_scenario(black_box(&s), &grid).unwrap()));
    group.bench_function("branch", |b| b.iter(|| branch_run(black_box(&s), &grid).unwrap()));
    group.finish();
}

fn observables(c: &mut Criterion) {
    let s = scenario(15);
    let rho = run_scenario(&s, &[90.0]).unwrap().snapshots[0].density().unwrap();
    c.bench_function("pairwise concurrences N=15", |b| {
        b.iter(|| pairwise_concurrences(black_box(&rho)).unwrap())
    });
}

fn integrator(c: &mut Criterion) {
    let s = scenario(8);
    let rho = initial_state(&s).unwrap();
    let mut group = c.benchmark_group("master equation");
    group.sample_size(10);
    group.bench_function("rk4 100 steps N=8", |b| {
        b.iter(|| fixed_step_evolve(black_box(&rho), StageKind::Cavity1, 30.0, 100, &s).unwrap())
    });
    group.finish();
}

criterion_group!(benches, stage_maps, full_runs, observables, integrator);
criterion_main!(benches);
