//! Cross-backend certification runs.

use std::fmt;
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use cqed_core::analytic::rho_stage1;
use cqed_core::evolution::{initial_state, stage_step};
use cqed_core::hilbert::{trace_distance, truncation_for_tail};
use cqed_core::oracle::{oracle_run, IntegratorConfig};
use cqed_core::{branch_run, run_scenario, DensityMatrix, Result as CoreResult, Scenario, StageKind, Trajectory, C64};

use crate::presets::{AMPLITUDES, RATES};

/// Trace-distance bound between exact representations.
pub const EXACT_TOLERANCE: f64 = 1e-8;

/// Trace-distance bound between the exact maps and the integrator.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

/// Fock tail mass that keeps truncation error below [`EXACT_TOLERANCE`].
pub const TIGHT_TAIL: f64 = 1e-18;

/// Sample grid of the coarse full-scenario comparisons, us.
pub const COARSE_GRID: [f64; 3] = [30.0, 60.0, 90.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn bound(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: value < tolerance,
            detail: format!("{value:.3e} (bound {tolerance:.0e})"),
        }
    }

    fn failed(name: impl Into<String>, err: impl fmt::Display) -> Self {
        Self {
            name: name.into(),
            passed: false,
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Scenario with real amplitudes, relative damping and truncations sized
/// for [`TIGHT_TAIL`].
pub fn tight_scenario(alpha: f64, beta: f64, g: f64, q: f64) -> Scenario {
    let (a, b) = (C64::from(alpha), C64::from(beta));
    Scenario::experimental()
        .with_amplitudes(a, b)
        .with_relative_damping(g, q)
        .with_truncation(truncation_for_tail(a, TIGHT_TAIL), truncation_for_tail(b, TIGHT_TAIL))
}

/// First cavity alone for `duration` us, with an empty second cavity.
pub fn first_cavity_scenario(alpha: f64, g: f64, duration: f64) -> Scenario {
    let mut s = tight_scenario(alpha, 0.0, g, 0.0).first_cavity_only(duration);
    s.truncation[1] = Some(1);
    s
}

/// Largest trace distance between the closed-form first-cavity state and
/// the dense stage map at `times`.
pub fn analytic_gap(s: &Scenario, times: &[f64]) -> CoreResult<f64> {
    let rho0 = initial_state(s)?;
    let mut worst = 0.0f64;
    for &t in times {
        let dense = stage_step(&rho0, StageKind::Cavity1, t, s)?;
        worst = worst.max(trace_distance(&dense, &rho_stage1(t, s)?));
    }
    Ok(worst)
}

/// Largest snapshot trace distance between two trajectories.
pub fn trajectory_gap(a: &Trajectory, b: &Trajectory) -> CoreResult<f64> {
    let mut worst = 0.0f64;
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        worst = worst.max(trace_distance(&x.density()?, &y.density()?));
    }
    Ok(worst)
}

pub fn branch_dense_gap(s: &Scenario, grid: &[f64]) -> CoreResult<f64> {
    trajectory_gap(&run_scenario(s, grid)?, &branch_run(s, grid)?)
}

/// Largest violation of unit trace, Hermiticity and positivity.
pub fn physicality_violation(rho: &DensityMatrix) -> f64 {
    let trace = (rho.trace() - C64::from(1.0)).norm();
    trace.max(rho.hermiticity_error()).max((-rho.min_eigenvalue()).max(0.0))
}

fn analytic_check(alpha: f64, g: f64, times: &[f64]) -> Check {
    let name = format!("closed form vs dense, alpha {alpha}, g {g}");
    match analytic_gap(&first_cavity_scenario(alpha, g, times[times.len() - 1]), times) {
        Ok(gap) => Check::bound(name, gap, EXACT_TOLERANCE),
        Err(e) => Check::failed(name, e),
    }
}

fn branch_check(alpha: f64, beta: f64, g: f64, q: f64) -> Check {
    let name = format!("branch vs dense, alpha {alpha}, beta {beta}, g {g}, q {q}");
    match branch_dense_gap(&tight_scenario(alpha, beta, g, q), &COARSE_GRID) {
        Ok(gap) => Check::bound(name, gap, EXACT_TOLERANCE),
        Err(e) => Check::failed(name, e),
    }
}

fn physicality_check(s: &Scenario, grid: &[f64]) -> Check {
    let name = "trace, Hermiticity and positivity of dense snapshots";
    let worst = run_scenario(s, grid).and_then(|traj| {
        traj.snapshots
            .iter()
            .map(|snap| snap.density().map(|rho| physicality_violation(&rho)))
            .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
    });
    match worst {
        Ok(v) => Check::bound(name, v, 1e-9),
        Err(e) => Check::failed(name, e),
    }
}

fn oracle_check() -> Check {
    let name = "dense vs master-equation integration, alpha = beta = 1, g = q = 0.05";
    let s = Scenario::experimental()
        .with_amplitudes(C64::from(1.0), C64::from(1.0))
        .with_relative_damping(0.05, 0.05)
        .with_truncation(20, 20);
    let grid: Vec<f64> = (1..=10).map(|k| 9.0 * k as f64).collect();
    let gap = run_scenario(&s, &grid)
        .and_then(|dense| oracle_run(&s, &grid, &IntegratorConfig::default()).and_then(|o| trajectory_gap(&dense, &o)));
    match gap {
        Ok(gap) => Check::bound(name, gap, ORACLE_TOLERANCE),
        Err(e) => Check::failed(name, e),
    }
}

/// Runs the certification suite. The quick level finishes in seconds; the
/// full level covers every amplitude and damping combination and the
/// integrator comparison.
pub fn validate(level: Level) -> Report {
    let start = Instant::now();
    let mut checks = vec![
        analytic_check(1.0, 0.05, &[37.0, 251.0, 640.0]),
        branch_check(0.5, 0.5, 0.05, 0.05),
        physicality_check(&tight_scenario(0.5, 0.5, 0.5, 0.5), &COARSE_GRID),
    ];
    if level == Level::Full {
        let times: Vec<f64> = (1..=20).map(|k| 50.0 * k as f64).collect();
        for alpha in AMPLITUDES {
            for g in RATES {
                checks.push(analytic_check(alpha, g, &times));
            }
        }
        let mut combos = Vec::new();
        for alpha in AMPLITUDES {
            for beta in AMPLITUDES {
                for g in RATES {
                    for q in RATES {
                        combos.push((alpha, beta, g, q));
                    }
                }
            }
        }
        checks.par_extend(combos.par_iter().map(|&(a, b, g, q)| branch_check(a, b, g, q)));
        checks.push(oracle_check());
    }
    info!("validation took {:.1} s", start.elapsed().as_secs_f64());
    Report { checks }
}
