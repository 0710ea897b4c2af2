//! Pairwise concurrence among atom, field 1 and field 2.
//!
//! Every field is supported on the span of at most two coherent branches,
//! so a two-party reduced state involving a field is mapped to an
//! effective two-qubit state by projecting the field onto the top two
//! eigenvectors of its single-party reduction. The probability weight lost
//! in that projection is reported alongside the concurrence.

use log::warn;

use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, DensityMatrix, Subsystem, SubsystemLayout};
use crate::linalg::{self, CMatrix, C64};

/// Eigenvalues below this are treated as zero when choosing supports.
pub const SUPPORT_TOLERANCE: f64 = 1e-10;
/// Discarded weight above which a reduction is flagged.
pub const DISCARDED_WEIGHT_FLAG: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct EffectiveQubitReduction {
    pub two_qubit_state: DensityMatrix,
    /// Columns span the kept two-dimensional support of each party, in the
    /// party's original basis.
    pub support_bases: [CMatrix; 2],
    pub discarded_weight: f64,
    /// Some party had fewer than two eigenvalues above the tolerance; the
    /// concurrence of such a reduction is zero.
    pub rank_deficient: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairwiseConcurrences {
    pub atom_field1: f64,
    pub atom_field2: f64,
    pub field1_field2: f64,
}

impl PairwiseConcurrences {
    pub fn as_array(&self) -> [f64; 3] {
        [self.atom_field1, self.atom_field2, self.field1_field2]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseReport {
    pub concurrences: PairwiseConcurrences,
    /// Discarded weights for (A-F1, A-F2, F1-F2).
    pub discarded_weight: [f64; 3],
}

impl PairwiseReport {
    pub fn max_discarded_weight(&self) -> f64 {
        self.discarded_weight.iter().copied().fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> bool {
        self.max_discarded_weight() >= DISCARDED_WEIGHT_FLAG
    }
}

/// Top-two eigenvectors of a single-party state, as a `d x 2` matrix, and
/// whether the second eigenvalue is numerically zero.
pub fn support_basis(single_party: &CMatrix, tol: f64) -> (CMatrix, bool) {
    let d = single_party.nrows();
    if d <= 2 {
        return (CMatrix::identity(d, 2), false);
    }
    let (values, vectors) = linalg::eigh(single_party);
    let basis = vectors.columns(d - 2, 2).into_owned();
    // largest eigenvector first
    let basis = CMatrix::from_columns(&[basis.column(1).into_owned(), basis.column(0).into_owned()]);
    (basis, values[d - 2] < tol)
}

/// Projects a two-party state onto the product of each party's dominant
/// two-dimensional support.
pub fn effective_two_qubit(rho_pair: &DensityMatrix, tol: f64) -> Result<EffectiveQubitReduction> {
    let layout = rho_pair.layout();
    if layout.len() != 2 {
        return Err(Error::Layout(format!(
            "effective two-qubit reduction needs two parties, got {}",
            layout.len()
        )));
    }
    let mut bases = Vec::with_capacity(2);
    let mut rank_deficient = false;
    for party in 0..2 {
        if layout.dims()[party] == 2 {
            bases.push(CMatrix::identity(2, 2));
            continue;
        }
        let single = partial_trace(rho_pair, &[party])?;
        let (basis, deficient) = support_basis(single.entries(), tol);
        rank_deficient |= deficient;
        bases.push(basis);
    }
    let product = bases[0].kronecker(&bases[1]);
    let projected = product.adjoint() * rho_pair.entries() * &product;
    let kept = projected.trace().re;
    let discarded_weight = (1.0 - kept).max(0.0);
    log_discarded(discarded_weight);

    let two_qubit_layout = SubsystemLayout::new(vec![2, 2], layout.labels().to_vec())?;
    let normalized = if kept > 0.0 { projected.unscale(kept) } else { projected };
    let [a, b]: [CMatrix; 2] = bases.try_into().expect("two bases");
    Ok(EffectiveQubitReduction {
        two_qubit_state: DensityMatrix::from_parts(two_qubit_layout, linalg::hermitian_part(&normalized)),
        support_bases: [a, b],
        discarded_weight,
        rank_deficient,
    })
}

pub(crate) fn log_discarded(weight: f64) {
    if weight >= DISCARDED_WEIGHT_FLAG {
        warn!("effective two-qubit reduction discarded weight {weight:e}; record flagged");
    } else if weight > SUPPORT_TOLERANCE {
        warn!("effective two-qubit reduction discarded weight {weight:e}");
    }
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)` of a two-qubit state.
///
/// The `l_i` are computed as singular values of `W^T (sy x sy) W` where
/// `rho = W W^dagger`, which equal the square roots of the eigenvalues of
/// `rho (sy x sy) rho^* (sy x sy)`.
pub fn wootters_concurrence(rho: &DensityMatrix) -> f64 {
    assert_eq!(rho.dim(), 4, "concurrence is defined for two qubits");
    concurrence_of_matrix(rho.entries())
}

pub(crate) fn concurrence_of_matrix(rho: &CMatrix) -> f64 {
    let (values, vectors) = linalg::eigh(rho);
    let mut w = vectors;
    for (c, v) in values.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        w.column_mut(c).scale_mut(s);
    }
    let flip = spin_flip();
    let tau = w.transpose() * flip * &w;
    let mut sv = singular_values(&tau);
    sv.sort_by(|a, b| b.total_cmp(a));
    (sv[0] - sv[1] - sv[2] - sv[3]).max(0.0)
}

/// Singular values by Golub-Kahan iteration, falling back to the square
/// roots of the eigenvalues of `m^dagger m` if the iteration stalls.
fn singular_values(m: &CMatrix) -> Vec<f64> {
    match m.clone().try_svd(false, false, f64::EPSILON, SVD_MAX_ITERATIONS) {
        Some(svd) => svd.singular_values.iter().copied().collect(),
        None => {
            warn!("singular value iteration stalled; using the Gram spectrum");
            linalg::eigvalsh(&(m.adjoint() * m))
                .into_iter()
                .map(|v| v.max(0.0).sqrt())
                .collect()
        }
    }
}

const SVD_MAX_ITERATIONS: usize = 10_000;

/// `sigma_y (x) sigma_y`.
fn spin_flip() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 3)] = C64::from(-1.0);
    m[(1, 2)] = C64::from(1.0);
    m[(2, 1)] = C64::from(1.0);
    m[(3, 0)] = C64::from(-1.0);
    m
}

/// Linear entropy tangle `4 det(rho)` of a single qubit.
pub fn qubit_tangle(rho: &CMatrix) -> f64 {
    4.0 * (rho[(0, 0)] * rho[(1, 1)] - rho[(0, 1)] * rho[(1, 0)]).re
}

fn positions(layout: &SubsystemLayout) -> Result<[usize; 3]> {
    let find = |s: Subsystem| {
        layout
            .position(s)
            .ok_or_else(|| Error::Layout(format!("layout has no {s}")))
    };
    Ok([find(Subsystem::Atom)?, find(Subsystem::Field1)?, find(Subsystem::Field2)?])
}

/// Concurrences for (atom, field 1), (atom, field 2) and (field 1, field 2).
pub fn pairwise_concurrences(rho: &DensityMatrix) -> Result<PairwiseReport> {
    let [atom, f1, f2] = positions(rho.layout())?;
    let mut out = [0.0; 3];
    let mut discarded = [0.0; 3];
    for (i, pair) in [[atom, f1], [atom, f2], [f1, f2]].iter().enumerate() {
        let reduced = partial_trace(rho, pair)?;
        let effective = effective_two_qubit(&reduced, SUPPORT_TOLERANCE)?;
        out[i] = wootters_concurrence(&effective.two_qubit_state);
        discarded[i] = effective.discarded_weight;
    }
    Ok(PairwiseReport {
        concurrences: PairwiseConcurrences {
            atom_field1: out[0],
            atom_field2: out[1],
            field1_field2: out[2],
        },
        discarded_weight: discarded,
    })
}

/// Outcome of the CKW monogamy diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Monogamy {
    /// `tau_A - C_AF1^2 - C_AF2^2`; the inequality requires `>= -1e-6`.
    Residual(f64),
    /// The global state is mixed; the diagnostic does not apply.
    NotPure,
}

pub const PURITY_THRESHOLD: f64 = 1.0 - 1e-6;

pub fn monogamy_residual(rho: &DensityMatrix) -> Result<Monogamy> {
    if rho.purity() <= PURITY_THRESHOLD {
        return Ok(Monogamy::NotPure);
    }
    let [atom, _, _] = positions(rho.layout())?;
    let reduced_atom = partial_trace(rho, &[atom])?;
    let pairs = pairwise_concurrences(rho)?.concurrences;
    Ok(Monogamy::Residual(monogamy_from_parts(
        qubit_tangle(reduced_atom.entries()),
        &pairs,
    )))
}

pub fn monogamy_from_parts(atom_tangle: f64, pairs: &PairwiseConcurrences) -> f64 {
    atom_tangle - pairs.atom_field1.powi(2) - pairs.atom_field2.powi(2)
}
