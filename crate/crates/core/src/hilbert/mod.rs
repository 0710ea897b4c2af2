//! Truncated Fock spaces, coherent states and density-matrix algebra.
//!
//! Composite states are always ordered (atom, field 1, field 2). The atom
//! basis is `|e> = index 0`, `|g> = index 1`; field factors run over photon
//! numbers `0..=N`.

mod coherent;
mod layout;
mod ops;
mod state;

pub use coherent::{
    coherent_coefficients, coherent_overlap, coherent_state, coherent_state_with_tolerance,
    default_truncation, tail_mass, truncation_for_tail, DEFAULT_TAIL_TOLERANCE,
};
pub(crate) use coherent::checked_coherent_vector;
pub use layout::{Subsystem, SubsystemLayout};
pub(crate) use ops::{mean_photon_number_fast, projector};
pub use ops::{
    mean_photon_number, partial_trace, photon_number_distribution, tensor_product,
    trace_distance, Tensor,
};
pub use state::{
    DensityMatrix, PureState, HERMITICITY_TOLERANCE, POSITIVITY_TOLERANCE, TRACE_TOLERANCE,
};

/// Atom basis index of the excited level.
pub const EXCITED: usize = 0;
/// Atom basis index of the ground level.
pub const GROUND: usize = 1;
