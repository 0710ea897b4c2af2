//! Parameter sweeps: one simulation and one CSV file per parameter tuple.

use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;

use cqed_core::evolution::simulate_converged;
use cqed_core::{evolution, Backend, Scenario, Trajectory, C64};

use crate::config::SweepSpec;
use crate::csv;
use crate::error::{CliError, Result};

/// Largest number of truncation increases tried by `--converge`.
pub const CONVERGENCE_PASSES: usize = 8;

/// Overrides shared by every simulating verb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub backend: Option<Backend>,
    pub truncation: Option<[usize; 2]>,
    pub converge: bool,
    /// Concurrent simulations; 0 lets the thread pool decide.
    pub jobs: usize,
}

/// One parameter tuple of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub alpha: C64,
    pub beta: C64,
    pub g: Option<f64>,
    pub q: Option<f64>,
    pub scenario: Scenario,
}

impl SweepPoint {
    /// Canonical file name such as `a0.5_b1_g0.05_q0.csv`. Absolute rates
    /// are written as `G`/`Q` followed by the rate.
    pub fn file_name(&self) -> String {
        let g = match self.g {
            Some(g) => format!("g{}", format_real(g)),
            None => format!("G{}", format_real(self.scenario.gamma[0])),
        };
        let q = match self.q {
            Some(q) => format!("q{}", format_real(q)),
            None => format!("Q{}", format_real(self.scenario.gamma[1])),
        };
        format!("a{}_b{}_{g}_{q}.csv", format_amplitude(self.alpha), format_amplitude(self.beta))
    }
}

fn format_real(v: f64) -> String {
    format!("{}", if v == 0.0 { 0.0 } else { v })
}

fn format_amplitude(z: C64) -> String {
    if z.im == 0.0 {
        format_real(z.re)
    } else {
        format!("{}{:+}i", format_real(z.re), z.im)
    }
}

fn optional(values: &Option<Vec<f64>>) -> Vec<Option<f64>> {
    match values {
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![None],
    }
}

/// Cartesian product of the sweep lists, in (alpha, beta, g, q) order.
pub fn sweep_points(base: &Scenario, spec: &SweepSpec, options: &RunOptions) -> Vec<SweepPoint> {
    let mut points = Vec::new();
    for &alpha in &spec.alpha {
        for &beta in &spec.beta {
            for g in optional(&spec.g) {
                for q in optional(&spec.q) {
                    let mut scenario = base.clone().with_amplitudes(alpha, beta);
                    if let Some(g) = g {
                        scenario.gamma[0] = g * scenario.dispersive[0].abs();
                    }
                    if let Some(q) = q {
                        scenario.gamma[1] = q * scenario.dispersive[1].abs();
                    }
                    if let Some([n1, n2]) = options.truncation {
                        scenario = scenario.with_truncation(n1, n2);
                    }
                    points.push(SweepPoint {
                        alpha,
                        beta,
                        g,
                        q,
                        scenario,
                    });
                }
            }
        }
    }
    points
}

/// Runs one scenario with the requested backend and overrides.
pub fn run_point(scenario: &Scenario, times: &[f64], backend: Backend, options: &RunOptions) -> Result<Trajectory> {
    let backend = options.backend.unwrap_or(backend);
    let trajectory = if options.converge {
        let (trajectory, cutoffs) = simulate_converged(scenario, times, backend, CONVERGENCE_PASSES)?;
        info!("converged at truncations {cutoffs:?}");
        trajectory
    } else {
        evolution::simulate(scenario, times, backend)?
    };
    Ok(trajectory)
}

pub(crate) fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))
}

/// Runs every point of the sweep and writes `<out>/<file_name>`. Returns the
/// written paths in sweep order.
pub fn run_sweep(base: &Scenario, spec: &SweepSpec, out: &Path, options: &RunOptions) -> Result<Vec<PathBuf>> {
    let points = sweep_points(base, spec, options);
    info!("sweeping {} parameter tuples", points.len());
    pool(options.jobs)?.install(|| {
        points
            .par_iter()
            .map(|point| {
                let trajectory = run_point(&point.scenario, &spec.times, spec.backend, options)?;
                let path = out.join(point.file_name());
                csv::write_file(&path, &csv::render(&csv::records(&trajectory)))?;
                Ok(path)
            })
            .collect()
    })
}
