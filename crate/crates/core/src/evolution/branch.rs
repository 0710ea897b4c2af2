//! Coherent-branch backend.
//!
//! Starting from a coherent product state the global state stays a finite
//! sum of terms `w |s><s'| (x) |k1><l1| (x) |k2><l2|` with normalized
//! coherent states. Dispersive phases and zero-temperature damping rotate
//! and shrink the labels and rescale `w`; the Ramsey rotation mixes atomic
//! indices. Observables are computed in the (at most two-dimensional) span
//! of each field's labels, so no Fock truncation enters.

use crate::entanglement::SUPPORT_TOLERANCE;
use crate::error::{Error, Result};
use crate::hilbert::{coherent_coefficients, coherent_overlap, DensityMatrix, Subsystem, SubsystemLayout, EXCITED};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};

use super::dense::{atom_superposition, drive, ramsey_rotation, sigma_z};
use super::scenario::{dispersive_validity, Frame, InitialState, Scenario};
use super::stage::{StageKind, StagePlan};
use super::trajectory::{Backend, Observables, Snapshot, Trajectory};

/// Ket and bra amplitudes of a coherent dyad `|ket><bra|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelPair {
    pub ket: C64,
    pub bra: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTerm {
    /// Atomic dyad `|atom[0]><atom[1]|`.
    pub atom: [usize; 2],
    pub weight: C64,
    pub fields: [LabelPair; 2],
}

/// Labels closer than this are merged when building a field span.
const LABEL_TOLERANCE: f64 = 1e-13;
const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub terms: Vec<BranchTerm>,
    /// Fock cutoffs used by [`BranchState::densify`].
    pub truncation: [usize; 2],
}

/// `(1 - e^{-z}) / z`.
fn relaxation_factor(z: C64) -> C64 {
    if z.norm() < SERIES_THRESHOLD {
        ONE - z / 2.0 + z * z / 6.0
    } else {
        (ONE - (-z).exp()) / z
    }
}

/// Evolves `|k><l|` under `H_ket . - . H_bra` plus damping at rate `gamma`
/// for `tau`, where `H_x = nu_x n + shift_x`. Returns the new labels and the
/// logarithm of the weight factor.
fn evolve_pair(pair: LabelPair, nu: [f64; 2], shift: [f64; 2], gamma: f64, tau: f64) -> (LabelPair, C64) {
    let (k, l) = (pair.ket, pair.bra);
    let k_new = k * (-C64::new(gamma, nu[0]) * tau).exp();
    let l_new = l * (-C64::new(gamma, nu[1]) * tau).exp();
    let dnu = nu[0] - nu[1];
    // d/dt tr = -i (dnu <n> + dshift) tr with <n>(t) = k l* e^{-(2 gamma + i dnu) t}
    let z = C64::new(2.0 * gamma, dnu) * tau;
    let trace_log = C64::new(0.0, -dnu * tau) * k * l.conj() * relaxation_factor(z)
        - C64::new(0.0, (shift[0] - shift[1]) * tau);
    // weight = trace / <l|k>
    let log_factor = trace_log + (l.conj() * k - l_new.conj() * k_new)
        - 0.5 * (k.norm_sqr() - k_new.norm_sqr())
        - 0.5 * (l.norm_sqr() - l_new.norm_sqr());
    (LabelPair { ket: k_new, bra: l_new }, log_factor)
}

/// Orthonormal coordinates for the span of a set of coherent states:
/// returns `(labels, coords)` with `coords` column `j` the components of
/// `|labels[j]>` in the span basis.
fn field_span(labels: &[C64]) -> (Vec<C64>, CMatrix) {
    let mut distinct: Vec<C64> = Vec::new();
    for &l in labels {
        if !distinct.iter().any(|d| (d - l).norm() <= LABEL_TOLERANCE * (1.0 + l.norm())) {
            distinct.push(l);
        }
    }
    let m = distinct.len();
    let gram = CMatrix::from_fn(m, m, |i, j| coherent_overlap(distinct[i], distinct[j]));
    let (values, vectors) = linalg::eigh(&gram);
    let kept: Vec<usize> = (0..m).rev().filter(|&i| values[i] > SUPPORT_TOLERANCE * 1e-4).collect();
    // <e_i|c_j> = sqrt(lambda_i) conj(U_ji)
    let coords = CMatrix::from_fn(kept.len(), m, |r, j| {
        let i = kept[r];
        vectors[(j, i)].conj() * values[i].sqrt()
    });
    (distinct, coords)
}

fn span_index(distinct: &[C64], label: C64) -> usize {
    distinct
        .iter()
        .position(|d| (d - label).norm() <= LABEL_TOLERANCE * (1.0 + label.norm()))
        .expect("label registered in span")
}

impl BranchState {
    /// Branch form of the scenario's coherent product initial state.
    pub fn initial(scenario: &Scenario) -> Result<Self> {
        if !matches!(scenario.initial, InitialState::CoherentProduct) {
            return Err(Error::UnsupportedInitialState);
        }
        let atom = atom_superposition(scenario.phi);
        let fields = [
            LabelPair { ket: scenario.alpha, bra: scenario.alpha },
            LabelPair { ket: scenario.beta, bra: scenario.beta },
        ];
        let mut terms = Vec::with_capacity(4);
        for s in 0..2 {
            for sp in 0..2 {
                terms.push(BranchTerm {
                    atom: [s, sp],
                    weight: atom[s] * atom[sp].conj(),
                    fields,
                });
            }
        }
        Ok(Self {
            terms,
            truncation: scenario.truncations(),
        })
    }

    pub fn trace(&self) -> C64 {
        self.terms
            .iter()
            .filter(|t| t.atom[0] == t.atom[1])
            .map(|t| t.weight * field_trace(&t.fields[0]) * field_trace(&t.fields[1]))
            .sum()
    }

    /// Evolves the state by `tau` us from the start of `stage`.
    pub fn step(&self, stage: StageKind, tau: f64, scenario: &Scenario) -> Result<Self> {
        let lab = scenario.frame == Frame::Lab;
        let mut terms = Vec::with_capacity(self.terms.len() * 4);
        for term in &self.terms {
            let mut log_weight = C64::from(0.0);
            let mut fields = term.fields;
            for (f, pair) in fields.iter_mut().enumerate() {
                let omega = stage.active_dispersive(f, scenario);
                let free = if lab { scenario.cavity_frequency[f] } else { 0.0 };
                let nu = term.atom.map(|s| free + omega * sigma_z(s));
                let shift = term.atom.map(|s| if s == EXCITED { omega } else { 0.0 });
                let (next, factor) = evolve_pair(*pair, nu, shift, scenario.gamma[f], tau);
                *pair = next;
                log_weight += factor;
            }
            let weight = term.weight * log_weight.exp();
            if stage == StageKind::Ramsey {
                let r = ramsey_rotation(tau, scenario);
                for u in 0..2 {
                    for up in 0..2 {
                        let c = r[(u, term.atom[0])] * r[(up, term.atom[1])].conj();
                        if c != ZERO {
                            terms.push(BranchTerm { atom: [u, up], weight: weight * c, fields });
                        }
                    }
                }
            } else {
                terms.push(BranchTerm { atom: term.atom, weight, fields });
            }
        }
        if lab {
            for t in &mut terms {
                let ds = sigma_z(t.atom[0]) - sigma_z(t.atom[1]);
                t.weight *= C64::from_polar(1.0, -0.5 * scenario.omega_a * ds * tau);
            }
        }
        let out = Self {
            terms: merge(terms),
            truncation: self.truncation,
        };
        let trace = out.trace();
        if (trace - ONE).norm() > crate::hilbert::TRACE_TOLERANCE {
            return Err(Error::NonPhysicalState(format!("branch state trace {trace} after {stage}")));
        }
        Ok(out)
    }

    /// Exact state expressed in an orthonormal basis of each field's label
    /// span, on an (atom, field 1, field 2) layout of dimension at most 8.
    pub fn compressed(&self) -> Result<DensityMatrix> {
        let spans: Vec<(Vec<C64>, CMatrix)> = (0..2)
            .map(|f| {
                let labels: Vec<C64> = self
                    .terms
                    .iter()
                    .flat_map(|t| [t.fields[f].ket, t.fields[f].bra])
                    .collect();
                field_span(&labels)
            })
            .collect();
        let layout = SubsystemLayout::new(
            vec![2, spans[0].1.nrows(), spans[1].1.nrows()],
            vec![Subsystem::Atom, Subsystem::Field1, Subsystem::Field2],
        )?;
        let vector = |f: usize, label: C64| -> CVector {
            let (distinct, coords) = &spans[f];
            coords.column(span_index(distinct, label)).into_owned()
        };
        let dim = layout.total_dim();
        let mut entries = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let ket = basis_vector(t.atom[0])
                .kronecker(&vector(0, t.fields[0].ket))
                .kronecker(&vector(1, t.fields[1].ket));
            let bra = basis_vector(t.atom[1])
                .kronecker(&vector(0, t.fields[0].bra))
                .kronecker(&vector(1, t.fields[1].bra));
            entries += ket * bra.adjoint() * t.weight;
        }
        Ok(DensityMatrix::from_parts(layout, linalg::hermitian_part(&entries)))
    }

    /// Density matrix on the truncated Fock layout, renormalized to unit
    /// trace.
    pub fn densify(&self) -> Result<DensityMatrix> {
        let [n1, n2] = self.truncation;
        let layout = SubsystemLayout::cavity(n1, n2);
        let dim = layout.total_dim();
        let mut entries = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let ket = basis_vector(t.atom[0])
                .kronecker(&coherent_coefficients(t.fields[0].ket, n1))
                .kronecker(&coherent_coefficients(t.fields[1].ket, n2));
            let bra = basis_vector(t.atom[1])
                .kronecker(&coherent_coefficients(t.fields[0].bra, n1))
                .kronecker(&coherent_coefficients(t.fields[1].bra, n2));
            entries.ger(t.weight, &ket, &bra.conjugate(), ONE);
        }
        let trace = entries.trace().re;
        let rho = DensityMatrix::from_parts(layout, linalg::hermitian_part(&entries).unscale(trace));
        rho.check_trace_and_hermiticity()?;
        Ok(rho)
    }

    /// Exact mean photon numbers of both fields.
    pub fn mean_photon_numbers(&self) -> [f64; 2] {
        let mut n = [0.0; 2];
        for t in self.terms.iter().filter(|t| t.atom[0] == t.atom[1]) {
            let traces = [field_trace(&t.fields[0]), field_trace(&t.fields[1])];
            for f in 0..2 {
                let p = t.fields[f];
                n[f] += (t.weight * p.bra.conj() * p.ket * traces[0] * traces[1]).re;
            }
        }
        n
    }

    pub fn observables(&self) -> Result<Observables> {
        Observables::from_parts(&self.compressed()?, self.mean_photon_numbers())
    }
}

fn field_trace(pair: &LabelPair) -> C64 {
    coherent_overlap(pair.bra, pair.ket)
}

fn basis_vector(s: usize) -> CVector {
    let mut v = CVector::zeros(2);
    v[s] = ONE;
    v
}

/// Sums terms sharing the same atomic dyad and labels.
fn merge(terms: Vec<BranchTerm>) -> Vec<BranchTerm> {
    let mut out: Vec<BranchTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.iter_mut().find(|o| o.atom == t.atom && o.fields == t.fields) {
            Some(o) => o.weight += t.weight,
            None => out.push(t),
        }
    }
    out.retain(|t| t.weight != ZERO);
    out
}

/// Coherent-branch evolution sampled at `sample_times`.
pub fn branch_run(scenario: &Scenario, sample_times: &[f64]) -> Result<Trajectory> {
    scenario.validate()?;
    dispersive_validity(scenario);
    let plan = StagePlan::new(scenario);
    let mut trajectory = Trajectory::new(Backend::Branch);
    drive(
        &plan,
        sample_times,
        BranchState::initial(scenario)?,
        |state, stage, tau| state.step(stage, tau, scenario),
        |t, state| {
            let obs = state.observables()?;
            trajectory.push(t, Snapshot::Branch(state), obs);
            Ok(())
        },
    )?;
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::dense;
    use crate::hilbert::trace_distance;

    #[test]
    fn initial_state_matches_dense() {
        let s = Scenario::experimental();
        let b = BranchState::initial(&s).unwrap();
        assert!((b.trace() - ONE).norm() < 1e-14);
        let d = dense::initial_state(&s).unwrap();
        assert!(trace_distance(&b.densify().unwrap(), &d) < 1e-9);
    }

    #[test]
    fn pure_damping_of_one_dyad_keeps_trace() {
        let pair = LabelPair { ket: C64::new(0.7, 0.2), bra: C64::new(-0.3, 0.5) };
        let (next, log_factor) = evolve_pair(pair, [0.0; 2], [0.0; 2], 0.4, 3.0);
        let before = coherent_overlap(pair.bra, pair.ket);
        let after = coherent_overlap(next.bra, next.ket) * log_factor.exp();
        assert!((before - after).norm() < 1e-14);
    }

    #[test]
    fn span_of_identical_labels_is_one_dimensional() {
        let (distinct, coords) = field_span(&[C64::from(0.5), C64::from(0.5)]);
        assert_eq!(distinct.len(), 1);
        assert_eq!(coords.nrows(), 1);
        assert!((coords[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn span_coordinates_reproduce_overlaps() {
        let labels = [C64::new(0.5, 0.1), C64::new(0.2, -0.4)];
        let (distinct, coords) = field_span(&labels);
        let gram = coords.adjoint() * &coords;
        for i in 0..2 {
            for j in 0..2 {
                assert!((gram[(i, j)] - coherent_overlap(distinct[i], distinct[j])).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn density_initial_state_is_rejected() {
        let mut s = Scenario::experimental();
        s.initial = InitialState::Density(dense::initial_state(&s).unwrap());
        assert_eq!(BranchState::initial(&s), Err(Error::UnsupportedInitialState));
    }
}
