//! Dense density-matrix backend.
//!
//! Within stage `k` the evolution superoperator factorizes as
//! `U_k . U_k^dagger` composed with a field damping map
//!
//! ```text
//! prod_i exp(-gamma_i tau (M_i + P_i)) exp(F_ik(tau) J_i),
//! M = a^dagger a ., P = . a^dagger a, J = a . a^dagger,
//! ```
//!
//! where `F_ik` depends on the atomic dyad through the eigenvalue `lambda`
//! of `sigma_z . - . sigma_z` (0 on `|e><e|`, `|g><g|`; +2 on `|e><g|`;
//! -2 on `|g><e|`). Every factor is applied exactly in the truncated Fock
//! space, which the zero-temperature damping never leaves.

use crate::error::{Error, Result};
use crate::hilbert::{checked_coherent_vector, DensityMatrix, SubsystemLayout, EXCITED};
use crate::linalg::{CMatrix, CVector, C64, ONE, ZERO};

use super::scenario::{dispersive_validity, Frame, InitialState, Scenario};
use super::stage::{check_grid, StageKind, StagePlan};
use super::trajectory::{Backend, Observables, Snapshot, Trajectory};

/// Below this `|(2 gamma + i omega lambda) tau|` the jump coefficient is
/// evaluated from its series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// `sigma_z` eigenvalue of atom level `s` (+1 for `|e>`, -1 for `|g>`).
pub(crate) fn sigma_z(s: usize) -> f64 {
    if s == EXCITED {
        1.0
    } else {
        -1.0
    }
}

/// Eigenvalue of `sigma_z . - . sigma_z` on the dyad `|s><s'|`.
pub fn dyad_eigenvalue(s: usize, s_prime: usize) -> f64 {
    sigma_z(s) - sigma_z(s_prime)
}

/// Diagonal unitary `exp(-i tau H)` of the dispersive Hamiltonian
/// `omega ((n+1)|e><e| - n |g><g|)` on atom (x) Fock(0..=truncation).
pub fn dispersive_unitary(omega: f64, tau: f64, truncation: usize) -> CMatrix {
    let d = truncation + 1;
    let mut u = CMatrix::zeros(2 * d, 2 * d);
    for n in 0..d {
        let n_f = n as f64;
        u[(n, n)] = C64::from_polar(1.0, -omega * tau * (n_f + 1.0));
        u[(d + n, d + n)] = C64::from_polar(1.0, omega * tau * n_f);
    }
    u
}

/// `exp(-i theta sigma_x)` in the `(|e>, |g>)` basis.
pub fn ramsey_unitary(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[C64::from(c), C64::new(0.0, -s), C64::new(0.0, -s), C64::from(c)],
    )
}

/// Ramsey rotation after `tau` us in the zone. In the lab frame the drive
/// phase is referenced to the start of the sequence, which turns the axis by
/// the free atomic phase accumulated before the zone.
pub(crate) fn ramsey_rotation(tau: f64, scenario: &Scenario) -> CMatrix {
    let mut r = ramsey_unitary(scenario.ramsey_area(tau));
    if scenario.frame == Frame::Lab {
        let start = scenario.stage_boundaries()[StageKind::Ramsey.index()];
        let turn = C64::from_polar(1.0, -(scenario.omega_a * start).rem_euclid(std::f64::consts::TAU));
        r[(0, 1)] *= turn;
        r[(1, 0)] *= turn.conj();
    }
    r
}

/// Jump coefficient `2 gamma (1 - e^{-(2 gamma + i omega lambda) tau}) /
/// (2 gamma + i omega lambda)` of a dyad block.
pub fn jump_coefficient(gamma: f64, omega: f64, lambda: f64, tau: f64) -> C64 {
    let rate = C64::new(2.0 * gamma, omega * lambda);
    let z = rate * tau;
    if z.norm() < SERIES_THRESHOLD {
        // (1 - e^{-z}) / z = 1 - z/2 + z^2/6 - ...
        C64::from(2.0 * gamma * tau) * (ONE - z / 2.0 + z * z / 6.0)
    } else {
        C64::from(2.0 * gamma) * (ONE - (-z).exp()) / rate
    }
}

pub(crate) fn cavity_dims(layout: &SubsystemLayout) -> Result<[usize; 3]> {
    match layout.dims() {
        [2, d1, d2] => Ok([2, *d1, *d2]),
        other => Err(Error::Layout(format!(
            "expected an (atom, field 1, field 2) layout, got dimensions {other:?}"
        ))),
    }
}

fn check_tau(stage: StageKind, tau: f64, scenario: &Scenario) -> Result<()> {
    let duration = scenario.duration(stage);
    if !(tau >= 0.0) || tau > duration + 1e-9 {
        return Err(Error::Config(format!(
            "time {tau} us outside the {stage} stage [0, {duration}]"
        )));
    }
    Ok(())
}

/// `exp(-gamma tau (M+P)) exp(F J)` on one field, with `jump[s][s']` the
/// coefficient of each atomic dyad block and `decay = e^{-gamma tau}`.
///
/// The `k`-th jump term has coefficient `F^k/k! A_k(n) A_k(m)` with
/// `A_k(n) = sqrt((n+k)!/n!)`, so each order is one contiguous sweep.
fn damp_field(rho: &CMatrix, dims: [usize; 3], field: usize, jump: [[C64; 2]; 2], decay: f64) -> CMatrix {
    let dim = rho.nrows();
    let half = dim / 2;
    let d = dims[field + 1];
    let stride = if field == 0 { dims[2] } else { 1 };
    let numbers: Vec<usize> = (0..dim).map(|i| (i / stride) % d).collect();

    let src = rho.as_slice();
    let mut out = rho.clone();
    let dst = out.as_mut_slice();
    let mut ladder = vec![1.0; d];
    let mut row_weight = vec![0.0; dim];
    let mut power = [[ONE; 2]; 2];
    for k in 1..d {
        for (n, a) in ladder.iter_mut().enumerate() {
            *a = if n + k < d { *a * ((n + k) as f64).sqrt() } else { 0.0 };
        }
        for (p_row, j_row) in power.iter_mut().zip(&jump) {
            for (p, j) in p_row.iter_mut().zip(j_row) {
                *p *= j / k as f64;
            }
        }
        if power.iter().flatten().all(|p| *p == ZERO) {
            break;
        }
        for (w, &n) in row_weight.iter_mut().zip(&numbers) {
            *w = ladder[n];
        }
        let shift = k * stride;
        for c in 0..dim - shift {
            let wc = ladder[numbers[c]];
            if wc == 0.0 {
                continue;
            }
            let s_col = usize::from(c >= half);
            let src_col = &src[(c + shift) * dim + shift..(c + shift + 1) * dim];
            let dst_col = &mut dst[c * dim..(c + 1) * dim];
            for s_row in 0..2 {
                let coef = power[s_row][s_col] * wc;
                if coef == ZERO {
                    continue;
                }
                let end = ((s_row + 1) * half).min(dim - shift);
                for r in s_row * half..end {
                    dst_col[r] += coef * (row_weight[r] * src_col[r]);
                }
            }
        }
    }
    let powers: Vec<f64> = (0..2 * d).map(|p| decay.powi(p as i32)).collect();
    for c in 0..dim {
        let m = numbers[c];
        for (r, v) in dst[c * dim..(c + 1) * dim].iter_mut().enumerate() {
            *v *= powers[numbers[r] + m];
        }
    }
    out
}

/// Field damping part of the stage superoperator (jump factor first, then
/// the number-damping factor).
pub fn dissipative_map(
    rho: &DensityMatrix,
    stage: StageKind,
    tau: f64,
    scenario: &Scenario,
) -> Result<DensityMatrix> {
    check_tau(stage, tau, scenario)?;
    let dims = cavity_dims(rho.layout())?;
    let mut entries = rho.entries().clone();
    for field in 0..2 {
        let gamma = scenario.gamma[field];
        if gamma == 0.0 || tau == 0.0 {
            continue;
        }
        let omega = stage.active_dispersive(field, scenario);
        let mut jump = [[ZERO; 2]; 2];
        for (s, row) in jump.iter_mut().enumerate() {
            for (s_prime, f) in row.iter_mut().enumerate() {
                *f = jump_coefficient(gamma, omega, dyad_eigenvalue(s, s_prime), tau);
            }
        }
        entries = damp_field(&entries, dims, field, jump, (-gamma * tau).exp());
    }
    let out = rho.map_entries(entries);
    out.check_trace_and_hermiticity()?;
    Ok(out)
}

/// `u_r = exp(-i tau E_r)` for the diagonal part of the stage propagator.
fn diagonal_phases(stage: StageKind, tau: f64, scenario: &Scenario, dims: [usize; 3]) -> Vec<C64> {
    let [_, d1, d2] = dims;
    let lab = scenario.frame == Frame::Lab;

    let atom_weight = if lab { 0.5 } else { 0.0 };
    let atom: [C64; 2] = [0, 1].map(|s| C64::from_polar(1.0, -atom_weight * scenario.omega_a * sigma_z(s) * tau));

    let field_table = |field: usize, d: usize| -> Vec<[C64; 2]> {
        let omega = stage.active_dispersive(field, scenario);
        let free = if lab { scenario.cavity_frequency[field] } else { 0.0 };
        (0..d)
            .map(|n| {
                let n_f = n as f64;
                // excited: omega (n + 1) is split as omega n here, the +omega
                // vacuum shift once per basis state below
                [
                    C64::from_polar(1.0, -(free + omega) * n_f * tau),
                    C64::from_polar(1.0, -(free - omega) * n_f * tau),
                ]
            })
            .collect()
    };
    let f1 = field_table(0, d1);
    let f2 = field_table(1, d2);
    let shift: f64 = (0..2).map(|f| stage.active_dispersive(f, scenario)).sum();
    let excited_shift = C64::from_polar(1.0, -shift * tau);

    let mut phases = Vec::with_capacity(2 * d1 * d2);
    for (s, atom_phase) in atom.iter().enumerate() {
        let base = if s == EXCITED { atom_phase * excited_shift } else { *atom_phase };
        for row1 in &f1 {
            for row2 in &f2 {
                phases.push(base * row1[s] * row2[s]);
            }
        }
    }
    phases
}

/// Unitary part `U_k . U_k^dagger` of the stage propagator: dispersive phases
/// in the cavities, the Ramsey rotation, and free phases in the lab frame.
pub fn stage_unitary(
    rho: &DensityMatrix,
    stage: StageKind,
    tau: f64,
    scenario: &Scenario,
) -> Result<DensityMatrix> {
    check_tau(stage, tau, scenario)?;
    let dims = cavity_dims(rho.layout())?;
    let mut entries = if stage == StageKind::Ramsey {
        rotate_atom(rho.entries(), &ramsey_rotation(tau, scenario))
    } else {
        rho.entries().clone()
    };
    let phases = diagonal_phases(stage, tau, scenario, dims);
    let dim = entries.nrows();
    let data = entries.as_mut_slice();
    for c in 0..dim {
        let pc = phases[c].conj();
        for r in 0..dim {
            data[c * dim + r] *= phases[r] * pc;
        }
    }
    Ok(rho.map_entries(entries))
}

/// `(R (x) I) rho (R (x) I)^dagger` for a 2x2 atomic unitary `R`.
fn rotate_atom(rho: &CMatrix, r: &CMatrix) -> CMatrix {
    let dim = rho.nrows();
    let half = dim / 2;
    let mut out = CMatrix::zeros(dim, dim);
    for s in 0..2 {
        for sp in 0..2 {
            let mut target = out.view_mut((s * half, sp * half), (half, half));
            for u in 0..2 {
                for up in 0..2 {
                    let coeff = r[(s, u)] * r[(sp, up)].conj();
                    if coeff != ZERO {
                        target += rho.view((u * half, up * half), (half, half)) * coeff;
                    }
                }
            }
        }
    }
    out
}

/// Evolves `rho` by `tau` us from the start of `stage`.
pub fn stage_step(
    rho: &DensityMatrix,
    stage: StageKind,
    tau: f64,
    scenario: &Scenario,
) -> Result<DensityMatrix> {
    let damped = dissipative_map(rho, stage, tau, scenario)?;
    let out = stage_unitary(&damped, stage, tau, scenario)?;
    out.check_trace_and_hermiticity()?;
    Ok(out)
}

/// Initial state of the scenario on its truncated layout.
pub fn initial_state(scenario: &Scenario) -> Result<DensityMatrix> {
    if let InitialState::Density(rho) = &scenario.initial {
        return Ok(rho.clone());
    }
    let [n1, n2] = scenario.truncations();
    let atom = atom_superposition(scenario.phi);
    let f1 = checked_coherent_vector(scenario.alpha, n1, scenario.tail_tolerance)?;
    let f2 = checked_coherent_vector(scenario.beta, n2, scenario.tail_tolerance)?;
    let psi: CVector = atom.kronecker(&f1).kronecker(&f2);
    Ok(crate::hilbert::projector(SubsystemLayout::cavity(n1, n2), &psi))
}

/// `(|e> + e^{-i phi/2} |g>) / sqrt(2)`.
pub(crate) fn atom_superposition(phi: f64) -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![C64::from(h), C64::from_polar(h, -phi / 2.0)])
}

/// Advances `state` through the stage plan, handing the state at each
/// sample time to `record`. Each sample is computed from the state at the
/// start of its stage.
pub(crate) fn drive<S: Clone>(
    plan: &StagePlan,
    grid: &[f64],
    initial: S,
    step: impl Fn(&S, StageKind, f64) -> Result<S>,
    mut record: impl FnMut(f64, S) -> Result<()>,
) -> Result<()> {
    check_grid(grid, plan.end_time())?;
    let mut start_state = initial;
    let mut current = 0;
    // state at the end of a stage, kept when a sample lands on the boundary
    let mut boundary: Option<(usize, S)> = None;
    for &t in grid {
        let target = plan.segment_at(t);
        while current < target {
            let seg = plan.segments[current];
            match boundary.take() {
                Some((index, state)) if index == current => start_state = state,
                _ if seg.duration > 0.0 => start_state = step(&start_state, seg.kind, seg.duration)?,
                _ => {}
            }
            current += 1;
        }
        let seg = plan.segments[current];
        let tau = (t - seg.start).clamp(0.0, seg.duration);
        let state = if tau == 0.0 {
            start_state.clone()
        } else {
            step(&start_state, seg.kind, tau)?
        };
        if tau == seg.duration && tau > 0.0 {
            boundary = Some((current, state.clone()));
        }
        record(t, state)?;
    }
    Ok(())
}

/// Dense evolution of the scenario's initial state, sampled at
/// `sample_times` (sorted, within `[0, t_5]`).
pub fn run_scenario(scenario: &Scenario, sample_times: &[f64]) -> Result<Trajectory> {
    scenario.validate()?;
    dispersive_validity(scenario);
    let plan = StagePlan::new(scenario);
    let mut trajectory = Trajectory::new(Backend::Dense);
    drive(
        &plan,
        sample_times,
        initial_state(scenario)?,
        |rho, stage, tau| stage_step(rho, stage, tau, scenario),
        |t, rho| {
            let obs = Observables::from_density(&rho)?;
            trajectory.push(t, Snapshot::Dense(rho), obs);
            Ok(())
        },
    )?;
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_coefficients, coherent_state, trace_distance};

    fn scenario() -> Scenario {
        Scenario::experimental()
    }

    #[test]
    fn dispersive_unitary_phases() {
        assert_eq!(dispersive_unitary(0.3, 0.0, 4), CMatrix::identity(10, 10));
        let u = dispersive_unitary(1.0, std::f64::consts::PI, 4);
        assert!((u[(0, 0)] - C64::from(-1.0)).norm() < 1e-15);
        assert!((u[(5, 5)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn dispersive_unitary_rotates_coherent_label() {
        let (omega, tau, n) = (0.7, 1.3, 30);
        let zeta = C64::new(0.8, -0.4);
        let psi = coherent_coefficients(zeta, n);
        let e = CVector::from_vec(vec![ONE, ZERO]);
        let out = dispersive_unitary(omega, tau, n) * e.kronecker(&psi);
        let rotated = coherent_coefficients(zeta * C64::from_polar(1.0, -omega * tau), n);
        let expected = e.kronecker(&rotated) * C64::from_polar(1.0, -omega * tau);
        assert!((out - expected).norm() < 1e-14);
    }

    #[test]
    fn ramsey_rotations() {
        assert_eq!(ramsey_unitary(0.0), CMatrix::identity(2, 2));
        let u = ramsey_unitary(std::f64::consts::FRAC_PI_2);
        let minus_i_sx = CMatrix::from_row_slice(2, 2, &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, -1.0), ZERO]);
        assert!((u - minus_i_sx).norm() < 1e-15);
        let out = ramsey_unitary(std::f64::consts::FRAC_PI_4) * CVector::from_vec(vec![ONE, ZERO]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0] - C64::from(h)).norm() < 1e-15);
        assert!((out[1] - C64::new(0.0, -h)).norm() < 1e-15);
    }

    #[test]
    fn jump_coefficient_small_rate_limit() {
        assert_eq!(jump_coefficient(0.0, 0.5, 2.0, 10.0), ZERO);
        // continuity across the series switch
        let tau = 1.0;
        let below = jump_coefficient(0.49e-6, 0.0, 0.0, tau);
        let above = jump_coefficient(0.51e-6, 0.0, 0.0, tau);
        assert!(((above - below) / 0.02e-6 - C64::from(2.0)).norm() < 1e-5);
        let exact = 2.0 * 0.3 * (1.0 - (-0.6f64).exp()) / 0.6;
        assert!((jump_coefficient(0.3, 0.0, 0.0, 1.0) - C64::from(exact)).norm() < 1e-15);
    }

    fn vacuum_product(n1: usize, n2: usize) -> DensityMatrix {
        let mut psi = CVector::zeros(2 * (n1 + 1) * (n2 + 1));
        psi[0] = C64::from(0.6);
        psi[(n1 + 1) * (n2 + 1)] = C64::new(0.0, 0.8);
        crate::hilbert::projector(SubsystemLayout::cavity(n1, n2), &psi)
    }

    #[test]
    fn vacuum_is_a_fixed_point_of_damping() {
        let s = scenario().with_relative_damping(1.0, 0.5);
        let rho = vacuum_product(4, 3);
        let out = dissipative_map(&rho, StageKind::Cavity1, 20.0, &s).unwrap();
        assert!((out.entries() - rho.entries()).norm() < 1e-15);
    }

    /// Amplitude damping of one mode built from Kraus operators
    /// `K_k = sum_n sqrt(C(n,k)) eta^{(n-k)/2} (1-eta)^{k/2} |n-k><n|`.
    fn kraus_damping(rho: &CMatrix, eta: f64) -> CMatrix {
        let d = rho.nrows();
        let mut out = CMatrix::zeros(d, d);
        for k in 0..d {
            let mut kraus = CMatrix::zeros(d, d);
            for n in k..d {
                let binom = (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64);
                let amp = (binom * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32)).sqrt();
                kraus[(n - k, n)] = C64::from(amp);
            }
            out += &kraus * rho * kraus.adjoint();
        }
        out
    }

    #[test]
    fn diagonal_blocks_match_kraus_amplitude_damping() {
        let n = 30;
        let s = scenario().with_relative_damping(0.8, 0.0).with_truncation(n, 1);
        let zeta = C64::new(1.1, 0.4);
        let field = coherent_state(zeta, n).unwrap();
        // atom in |e>, field 2 in vacuum
        let mut psi = CVector::zeros(2 * (n + 1) * 2);
        for k in 0..=n {
            psi[k * 2] = field.amplitudes()[k];
        }
        let rho = crate::hilbert::projector(SubsystemLayout::cavity(n, 1), &psi);
        let tau = 25.0;
        let out = dissipative_map(&rho, StageKind::Cavity1, tau, &s).unwrap();
        let field_out = crate::hilbert::partial_trace(&out, &[1]).unwrap();

        let eta = (-2.0 * s.gamma[0] * tau).exp();
        let kraus = kraus_damping(&field.to_density().into_entries(), eta);
        let kraus_state = DensityMatrix::new(field_out.layout().clone(), kraus).unwrap();
        assert!(trace_distance(&field_out, &kraus_state) < 1e-9);

        let damped = coherent_state(zeta * (-s.gamma[0] * tau).exp(), n).unwrap().to_density();
        assert!(trace_distance(&field_out, &damped) < 1e-9);
    }

    #[test]
    fn zero_rate_damping_is_identity() {
        let s = scenario();
        let rho = initial_state(&s).unwrap();
        let out = dissipative_map(&rho, StageKind::Cavity1, 30.0, &s).unwrap();
        assert_eq!(out.entries(), rho.entries());
    }

    #[test]
    fn step_outside_stage_is_rejected() {
        let s = scenario();
        let rho = initial_state(&s).unwrap();
        assert!(stage_step(&rho, StageKind::Free1, 11.0, &s).is_err());
        assert!(stage_step(&rho, StageKind::Free1, -1.0, &s).is_err());
    }

    #[test]
    fn everything_off_is_identity() {
        let mut s = scenario();
        s.dispersive = [0.0; 2];
        s.coupling = [None; 2];
        s.ramsey_angle = 0.0;
        let rho = initial_state(&s).unwrap();
        for stage in StageKind::ALL {
            let out = stage_step(&rho, stage, s.duration(stage), &s).unwrap();
            assert!((out.entries() - rho.entries()).norm() < 1e-14, "{stage}");
        }
    }

    #[test]
    fn zero_durations_give_single_initial_snapshot() {
        let mut s = scenario();
        s.durations = [0.0; 5];
        let traj = run_scenario(&s, &[0.0]).unwrap();
        assert_eq!(traj.len(), 1);
        let rho = traj.snapshots[0].density().unwrap();
        assert_eq!(rho, initial_state(&s).unwrap());
    }
}
