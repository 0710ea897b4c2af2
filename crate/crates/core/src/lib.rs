//! Simulation of a two-level atom crossing a dissipative dispersive cavity,
//! a Ramsey zone and a second dissipative dispersive cavity.
//!
//! The evolution of each stage is applied as an exact factorized
//! superoperator (a unitary conjugation composed with a closed-form
//! zero-temperature damping map), with two independent checks: the
//! closed-form first-cavity solution in [`analytic`] and a brute-force
//! master-equation integrator in [`oracle`]. Pairwise entanglement between
//! atom, field 1 and field 2 is measured with the Wootters concurrence in
//! [`entanglement`].
//!
//! Units: time in microseconds, angular frequencies in rad/us.

pub mod analytic;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod hilbert;
pub mod linalg;
pub mod oracle;

pub use error::{Error, Result};
pub use evolution::{
    branch_run, run_scenario, Backend, BranchState, Frame, Scenario, StageKind, Trajectory,
};
pub use hilbert::{DensityMatrix, PureState, SubsystemLayout};
pub use linalg::{CMatrix, CVector, C64};
