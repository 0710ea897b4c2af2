//! Master-equation integrator checks.

use cqed_core::evolution::{initial_state, stage_step, InitialState, Scenario, StageKind, StagePlan};
use cqed_core::hilbert::{coherent_state, mean_photon_number, trace_distance, PureState, SubsystemLayout};
use cqed_core::linalg::{max_abs, CVector};
use cqed_core::oracle::{fixed_step_evolve, integrate, liouvillian_apply, oracle_run, IntegratorConfig};
use cqed_core::{DensityMatrix, Error, C64};

fn small() -> Scenario {
    Scenario::experimental()
        .with_amplitudes(C64::new(0.6, 0.2), C64::from(0.4))
        .with_relative_damping(1.0, 0.5)
        .with_truncation(9, 8)
}

#[test]
fn generator_is_traceless_and_hermitian() {
    let s = small();
    let rho = initial_state(&s).unwrap();
    for stage in StageKind::ALL {
        let d = liouvillian_apply(&rho, stage, &s).unwrap();
        assert!(d.trace().norm() < 1e-12, "{stage}");
        assert!(max_abs(&(&d - d.adjoint())) < 1e-15, "{stage}");
    }
}

#[test]
fn constant_trajectory_for_zero_generator() {
    let mut s = small();
    s.gamma = [0.0; 2];
    s.dispersive = [0.0; 2];
    s.coupling = [None; 2];
    s.ramsey_angle = 0.0;
    let traj = oracle_run(&s, &[0.0, 45.0, 90.0], &IntegratorConfig::default()).unwrap();
    let rho0 = initial_state(&s).unwrap();
    for snap in &traj.snapshots {
        assert!(max_abs(&(snap.density().unwrap().entries() - rho0.entries())) < 1e-15);
    }
}

#[test]
fn pure_damping_photon_number() {
    // gamma tau = 0.5 from |1> coherent amplitude: <n> = e^{-1}
    let n1 = 20;
    let field = coherent_state(C64::from(1.0), n1).unwrap();
    let mut psi = CVector::zeros(2 * (n1 + 1) * 2);
    for k in 0..=n1 {
        psi[2 * k] = field.amplitudes()[k];
    }
    let rho = PureState::new(SubsystemLayout::cavity(n1, 1), psi).unwrap().to_density();
    let mut s = Scenario::experimental().first_cavity_only(25.0);
    s.dispersive = [0.0; 2];
    s.coupling = [None; 2];
    s.gamma = [0.02, 0.0];
    s.initial = InitialState::Density(rho);
    let traj = oracle_run(&s, &[25.0], &IntegratorConfig::default()).unwrap();
    let n = mean_photon_number(&traj.snapshots[0].density().unwrap(), 1).unwrap();
    assert!((n - (-1.0f64).exp()).abs() < 1e-6);
}

#[test]
fn trace_is_kept_along_the_run() {
    let s = small();
    let grid: Vec<f64> = (0..=9).map(|k| 10.0 * k as f64).collect();
    let traj = oracle_run(&s, &grid, &IntegratorConfig::default()).unwrap();
    for snap in &traj.snapshots {
        let rho = snap.density().unwrap();
        assert!((rho.trace() - C64::from(1.0)).norm() < 1e-12);
        assert!(rho.hermiticity_error() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-7);
    }
}

#[test]
fn fourth_order_convergence() {
    let s = small();
    let rho = initial_state(&s).unwrap();
    let tau = 30.0;
    let exact = stage_step(&rho, StageKind::Cavity1, tau, &s).unwrap();
    let error = |steps: usize| -> f64 {
        let approx: DensityMatrix = fixed_step_evolve(&rho, StageKind::Cavity1, tau, steps, &s).unwrap();
        max_abs(&(approx.entries() - exact.entries()))
    };
    let coarse = error(4);
    let fine = error(8);
    assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
}

#[test]
fn agrees_with_exact_stage_maps() {
    let s = small();
    let rho = initial_state(&s).unwrap();
    let traj = integrate(&rho, &StagePlan::new(&s), &[30.0], &IntegratorConfig::default()).unwrap();
    let exact = stage_step(&rho, StageKind::Cavity1, 30.0, &s).unwrap();
    assert!(trace_distance(&traj.snapshots[0].density().unwrap(), &exact) < 1e-8);
}

#[test]
fn invalid_configuration_is_rejected() {
    let cfg = IntegratorConfig {
        tolerance: -1.0,
        ..Default::default()
    };
    assert!(matches!(oracle_run(&small(), &[1.0], &cfg), Err(Error::Config(_))));
}

#[test]
fn tiny_step_budget_underflows() {
    let cfg = IntegratorConfig {
        tolerance: 1e-30,
        min_step: 1e-3,
        ..Default::default()
    };
    assert!(matches!(oracle_run(&small(), &[5.0], &cfg), Err(Error::StepUnderflow { .. })));
}
