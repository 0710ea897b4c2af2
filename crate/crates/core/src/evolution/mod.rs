//! Stage-by-stage evolution of the atom and the two cavity fields.

mod branch;
mod dense;
mod scenario;
mod stage;
mod trajectory;

pub use branch::{branch_run, BranchState, BranchTerm, LabelPair};
pub use dense::{
    dispersive_unitary, dissipative_map, dyad_eigenvalue, initial_state, jump_coefficient,
    ramsey_unitary, run_scenario, stage_step, stage_unitary,
};
pub(crate) use dense::{cavity_dims, sigma_z};
pub use scenario::{
    dispersive_validity, Coupling, DispersiveValidity, Frame, InitialState, Scenario,
    DEFAULT_DETUNING, DEFAULT_DURATIONS, DEFAULT_OMEGA_A, DEFAULT_RABI,
};
pub use stage::{StageKind, StagePlan, StageSegment};
pub use trajectory::{
    simulate, simulate_converged, Backend, Observables, Snapshot, Trajectory,
    CONVERGENCE_TOLERANCE, TRUNCATION_STEP,
};
