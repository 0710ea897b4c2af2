//! Closed-form state and concurrence during the first cavity.
//!
//! Inside cavity 1 the state is
//!
//! ```text
//! 1/2 { |e,a_e><e,a_e| + x |e,a_e><g,a_g| + x* |g,a_g><e,a_e| + |g,a_g><g,a_g| } (x) |b><b|
//! ```
//!
//! with branch labels `a_e = alpha e^{-(gamma_1 + i omega_1) t}`,
//! `a_g = alpha e^{-(gamma_1 - i omega_1) t}`, `b = beta e^{-gamma_2 t}`
//! (times the free cavity phases in the lab frame) and coherence factor
//! `x(t) = exp[i phi/2 + |alpha|^2 f_x(t) - i omega_1 t]`,
//! `f_x = gamma_1 (1 - e^{-2(gamma_1 + i omega_1) t}) / (gamma_1 + i omega_1) - (1 - e^{-2 gamma_1 t})`.
//! The atom-field-1 concurrence is `|x| sqrt(1 - |<a_g|a_e>|^2)`.

use crate::error::{Error, Result};
use crate::evolution::{Frame, InitialState, Scenario, StageKind};
use crate::hilbert::{checked_coherent_vector, coherent_overlap, projector, DensityMatrix, SubsystemLayout};
use crate::linalg::{CVector, C64, ONE};

const SERIES_THRESHOLD: f64 = 1e-6;

/// Closed-form quantities at one time inside cavity 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage1Snapshot {
    pub t: f64,
    pub alpha_e: C64,
    pub alpha_g: C64,
    pub beta_1: C64,
    pub x: C64,
    pub concurrence: f64,
}

/// Branch labels `(a_e, a_g, b)` after `t` us in cavity 1.
pub fn branch_amplitudes(t: f64, scenario: &Scenario) -> (C64, C64, C64) {
    let (w1, g1, g2) = (scenario.dispersive[0], scenario.gamma[0], scenario.gamma[1]);
    let (free1, free2) = match scenario.frame {
        Frame::Rotating => (0.0, 0.0),
        Frame::Lab => (scenario.cavity_frequency[0], scenario.cavity_frequency[1]),
    };
    let alpha = scenario.alpha;
    let alpha_e = alpha * (-C64::new(g1, free1 + w1) * t).exp();
    let alpha_g = alpha * (-C64::new(g1, free1 - w1) * t).exp();
    let beta_1 = scenario.beta * (-C64::new(g2, free2) * t).exp();
    (alpha_e, alpha_g, beta_1)
}

/// `f_x(t)`, with a series for small `(gamma_1 + i omega_1) t`.
pub fn decoherence_exponent(t: f64, gamma: f64, omega: f64) -> C64 {
    let rate = C64::new(gamma, omega);
    let z = 2.0 * rate * t;
    // (1 - e^{-z}) / z
    let relax = if z.norm() < SERIES_THRESHOLD {
        ONE - z / 2.0 + z * z / 6.0
    } else {
        (ONE - (-z).exp()) / z
    };
    C64::from(2.0 * gamma * t) * relax - (1.0 - (-2.0 * gamma * t).exp())
}

/// Coherence factor `x(t)` multiplying `|e,a_e><g,a_g|`.
pub fn coherence_factor(t: f64, scenario: &Scenario) -> C64 {
    let f = decoherence_exponent(t, scenario.gamma[0], scenario.dispersive[0]);
    let atom = match scenario.frame {
        Frame::Rotating => 0.0,
        Frame::Lab => scenario.omega_a,
    };
    let phase = C64::new(0.0, scenario.phi / 2.0 - (scenario.dispersive[0] + atom) * t);
    (phase + scenario.alpha.norm_sqr() * f).exp()
}

/// `|x| sqrt(1 - |<a_g|a_e>|^2)` with the exact coherent overlap.
pub fn concurrence_stage1(t: f64, scenario: &Scenario) -> f64 {
    let (alpha_e, alpha_g, _) = branch_amplitudes(t, scenario);
    let overlap = coherent_overlap(alpha_g, alpha_e).norm_sqr();
    let c = coherence_factor(t, scenario).norm() * (1.0 - overlap).max(0.0).sqrt();
    c.clamp(0.0, 1.0)
}

pub fn snapshot(t: f64, scenario: &Scenario) -> Stage1Snapshot {
    let (alpha_e, alpha_g, beta_1) = branch_amplitudes(t, scenario);
    Stage1Snapshot {
        t,
        alpha_e,
        alpha_g,
        beta_1,
        x: coherence_factor(t, scenario),
        concurrence: concurrence_stage1(t, scenario),
    }
}

/// Closed-form density matrix after `t` us in cavity 1, on the scenario's
/// truncated layout.
pub fn rho_stage1(t: f64, scenario: &Scenario) -> Result<DensityMatrix> {
    if !matches!(scenario.initial, InitialState::CoherentProduct) {
        return Err(Error::UnsupportedInitialState);
    }
    let duration = scenario.duration(StageKind::Cavity1);
    if !(t >= 0.0) || t > duration + 1e-9 {
        return Err(Error::Config(format!("time {t} us outside cavity 1 [0, {duration}]")));
    }
    let [n1, n2] = scenario.truncations();
    let tol = scenario.tail_tolerance;
    let (alpha_e, alpha_g, beta_1) = branch_amplitudes(t, scenario);
    let x = coherence_factor(t, scenario);
    let ve = checked_coherent_vector(alpha_e, n1, tol)?;
    let vg = checked_coherent_vector(alpha_g, n1, tol)?;
    let vb = checked_coherent_vector(beta_1, n2, tol)?;
    // sqrt(1/2)(|e,a_e> and |g,a_g>) with the relative factor x on the
    // off-diagonal blocks
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let d = ve.len();
    let mut e_part = CVector::zeros(2 * d);
    let mut g_part = CVector::zeros(2 * d);
    e_part.rows_mut(0, d).copy_from(&(ve * C64::from(h)));
    g_part.rows_mut(d, d).copy_from(&(vg * C64::from(h)));
    let layout = SubsystemLayout::cavity(n1, n2);
    let atom_field = &e_part * e_part.adjoint()
        + &e_part * g_part.adjoint() * x
        + &g_part * e_part.adjoint() * x.conj()
        + &g_part * g_part.adjoint();
    let field2 = projector(SubsystemLayout::single(crate::hilbert::Subsystem::Field2, n2 + 1)?, &vb);
    let rho = DensityMatrix::from_parts(layout, atom_field.kronecker(field2.entries()));
    rho.check_trace_and_hermiticity()?;
    Ok(rho)
}

/// One point of the first-cavity phase-space picture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpacePoint {
    pub t: f64,
    pub alpha_e: C64,
    pub alpha_g: C64,
    /// `|a_e - a_g|`.
    pub chord: f64,
}

/// Branch labels in the frame rotating at the cavity frequency.
pub fn phase_space_trajectory(scenario: &Scenario, times: &[f64]) -> Vec<PhaseSpacePoint> {
    let rotating = scenario.clone().with_frame(Frame::Rotating);
    times
        .iter()
        .map(|&t| {
            let (alpha_e, alpha_g, _) = branch_amplitudes(t, &rotating);
            PhaseSpacePoint {
                t,
                alpha_e,
                alpha_g,
                chord: (alpha_e - alpha_g).norm(),
            }
        })
        .collect()
}
