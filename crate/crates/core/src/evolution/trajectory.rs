use log::info;

use crate::entanglement::{self, Monogamy, PairwiseConcurrences, PURITY_THRESHOLD};
use crate::error::{Error, Result};
use crate::hilbert::{mean_photon_number_fast, partial_trace, DensityMatrix};

use super::branch::{branch_run, BranchState};
use super::dense::run_scenario;
use super::scenario::Scenario;

/// Evolution engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Exact factorized superoperator on the truncated density matrix.
    Dense,
    /// Coherent-branch bookkeeping, no Fock truncation in observables.
    Branch,
    /// Adaptive Runge-Kutta integration of the master equation.
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Dense(DensityMatrix),
    Branch(BranchState),
}

impl Snapshot {
    /// State on the truncated Fock layout.
    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            Snapshot::Dense(rho) => Ok(rho.clone()),
            Snapshot::Branch(state) => state.densify(),
        }
    }
}

/// Observables recorded at each sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub concurrences: PairwiseConcurrences,
    /// Effective two-qubit discarded weight for (A-F1, A-F2, F1-F2).
    pub discarded_weight: [f64; 3],
    pub purity: f64,
    pub mean_photons: [f64; 2],
    /// `4 det(rho_atom)`.
    pub atom_tangle: f64,
}

impl Observables {
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let photons = [mean_photon_number_fast(rho, 1), mean_photon_number_fast(rho, 2)];
        Self::from_parts(rho, photons)
    }

    pub(crate) fn from_parts(rho: &DensityMatrix, mean_photons: [f64; 2]) -> Result<Self> {
        let report = entanglement::pairwise_concurrences(rho)?;
        let atom = partial_trace(rho, &[0])?;
        Ok(Self {
            concurrences: report.concurrences,
            discarded_weight: report.discarded_weight,
            purity: rho.purity(),
            mean_photons,
            atom_tangle: entanglement::qubit_tangle(atom.entries()),
        })
    }

    pub fn flagged(&self) -> bool {
        self.discarded_weight
            .iter()
            .any(|&w| w >= entanglement::DISCARDED_WEIGHT_FLAG)
    }

    pub fn monogamy(&self) -> Monogamy {
        if self.purity <= PURITY_THRESHOLD {
            Monogamy::NotPure
        } else {
            Monogamy::Residual(entanglement::monogamy_from_parts(self.atom_tangle, &self.concurrences))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub backend: Backend,
    pub times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub observables: Vec<Observables>,
}

impl Trajectory {
    pub fn new(backend: Backend) -> Self {
        Self {
            backend,
            times: Vec::new(),
            snapshots: Vec::new(),
            observables: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, snapshot: Snapshot, observables: Observables) {
        self.times.push(t);
        self.snapshots.push(snapshot);
        self.observables.push(observables);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest concurrence difference against another trajectory sampled on
    /// the same grid.
    pub fn max_concurrence_diff(&self, other: &Trajectory) -> f64 {
        self.observables
            .iter()
            .zip(&other.observables)
            .map(|(a, b)| a.concurrences.max_abs_diff(&b.concurrences))
            .fold(0.0, f64::max)
    }
}

/// Runs the scenario with the chosen backend.
pub fn simulate(scenario: &Scenario, sample_times: &[f64], backend: Backend) -> Result<Trajectory> {
    match backend {
        Backend::Dense => run_scenario(scenario, sample_times),
        Backend::Branch => branch_run(scenario, sample_times),
        Backend::Oracle => crate::oracle::oracle_run(scenario, sample_times, &Default::default()),
    }
}

/// Convergence tolerance on concurrences between successive truncations.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;
/// Photons added to each cutoff per refinement pass.
pub const TRUNCATION_STEP: usize = 5;

/// Raises both Fock cutoffs until concurrences change by less than
/// [`CONVERGENCE_TOLERANCE`] on the grid. Returns the refined trajectory
/// and the cutoffs used.
pub fn simulate_converged(
    scenario: &Scenario,
    sample_times: &[f64],
    backend: Backend,
    max_passes: usize,
) -> Result<(Trajectory, [usize; 2])> {
    let mut cutoffs = scenario.truncations();
    let mut previous = simulate(scenario, sample_times, backend)?;
    for _ in 0..max_passes {
        let next_cutoffs = cutoffs.map(|n| n + TRUNCATION_STEP);
        let refined = scenario.clone().with_truncation(next_cutoffs[0], next_cutoffs[1]);
        let next = simulate(&refined, sample_times, backend)?;
        let change = previous.max_concurrence_diff(&next);
        info!("cutoffs {cutoffs:?} -> {next_cutoffs:?}: concurrence change {change:e}");
        cutoffs = next_cutoffs;
        previous = next;
        if change < CONVERGENCE_TOLERANCE {
            return Ok((previous, cutoffs));
        }
    }
    Err(Error::Config(format!(
        "concurrences not converged after {max_passes} truncation increases"
    )))
}
