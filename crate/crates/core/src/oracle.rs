//! Brute-force integration of the master equation
//!
//! ```text
//! d rho/dt = -i [H, rho] + sum_i gamma_i (2 a_i rho a_i^dagger - rho n_i - n_i rho)
//! ```
//!
//! in the truncated Fock basis with classical fourth-order Runge-Kutta and
//! step doubling. It shares no propagation code with the factorized
//! backends and is used to certify them.

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::evolution::{
    cavity_dims, initial_state, sigma_z, Backend, Frame, Observables, Scenario, Snapshot, StageKind,
    StagePlan, Trajectory,
};
use crate::hilbert::{DensityMatrix, EXCITED};
use crate::linalg::{self, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// First trial step, us.
    pub initial_step: f64,
    /// Largest accepted local error (max-abs entry of the step-doubling
    /// difference / 15).
    pub tolerance: f64,
    pub max_step: f64,
    /// Steps below this abort with [`Error::StepUnderflow`].
    pub min_step: f64,
    /// Largest trace drift tolerated in one step before renormalization.
    pub max_trace_drift: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            tolerance: 1e-12,
            max_step: 2.0,
            min_step: 1e-9,
            max_trace_drift: 1e-8,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.initial_step, self.tolerance, self.max_step, self.min_step, self.max_trace_drift];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.min_step > self.max_step {
            return Err(Error::Config(format!("invalid integrator configuration {self:?}")));
        }
        Ok(())
    }
}

/// Stage generator in the rotating frame, precomputed per stage.
struct Generator {
    dim: usize,
    /// Diagonal energies of the dispersive Hamiltonian.
    energies: Vec<f64>,
    /// Coefficient of `sigma_x` in the Ramsey Hamiltonian.
    rabi: f64,
    /// `(stride, dim, gamma)` per field.
    fields: [(usize, usize, f64); 2],
    /// Photon numbers of each basis state, per field.
    numbers: [Vec<usize>; 2],
    roots: Vec<f64>,
}

impl Generator {
    fn new(dims: [usize; 3], stage: StageKind, scenario: &Scenario) -> Self {
        let [_, d1, d2] = dims;
        let dim = 2 * d1 * d2;
        let atom_of = |r: usize| r / (d1 * d2);
        let numbers = [
            (0..dim).map(|r| (r / d2) % d1).collect::<Vec<_>>(),
            (0..dim).map(|r| r % d2).collect::<Vec<_>>(),
        ];
        let energies = (0..dim)
            .map(|r| {
                let s = atom_of(r);
                (0..2)
                    .map(|f| {
                        let omega = stage.active_dispersive(f, scenario);
                        let n = numbers[f][r] as f64;
                        // omega ((n+1)|e><e| - n|g><g|)
                        if s == EXCITED {
                            omega * (n + 1.0)
                        } else {
                            omega * sigma_z(s) * n
                        }
                    })
                    .sum()
            })
            .collect();
        let duration = scenario.duration(StageKind::Ramsey);
        let rabi = if stage == StageKind::Ramsey && duration > 0.0 {
            scenario.ramsey_angle / duration
        } else {
            0.0
        };
        let max_d = d1.max(d2);
        Self {
            dim,
            energies,
            rabi,
            fields: [(d2, d1, scenario.gamma[0]), (1, d2, scenario.gamma[1])],
            numbers,
            roots: (0..=max_d).map(|k| (k as f64).sqrt()).collect(),
        }
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let dim = self.dim;
        let half = dim / 2;
        let src = rho.as_slice();
        let mut out = CMatrix::zeros(dim, dim);
        let dst = out.as_mut_slice();
        let minus_i_rabi = C64::new(0.0, -self.rabi);
        for c in 0..dim {
            let col = c * dim;
            let flipped_col = ((c + half) % dim) * dim;
            for r in 0..dim {
                let v = src[col + r];
                let mut acc = C64::new(0.0, self.energies[c] - self.energies[r]) * v;
                for (f, &(stride, d, gamma)) in self.fields.iter().enumerate() {
                    if gamma == 0.0 {
                        continue;
                    }
                    let n = self.numbers[f][r];
                    let m = self.numbers[f][c];
                    acc -= v * (gamma * (n + m) as f64);
                    if n + 1 < d && m + 1 < d {
                        let jump = 2.0 * gamma * self.roots[n + 1] * self.roots[m + 1];
                        acc += src[col + stride * dim + r + stride] * jump;
                    }
                }
                if self.rabi != 0.0 {
                    let flipped_row = (r + half) % dim;
                    acc += minus_i_rabi * (src[col + flipped_row] - src[flipped_col + r]);
                }
                dst[col + r] = acc;
            }
        }
        out
    }

    fn rk4(&self, rho: &CMatrix, h: f64) -> CMatrix {
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * C64::from(h / 2.0)));
        let k3 = self.apply(&(rho + &k2 * C64::from(h / 2.0)));
        let k4 = self.apply(&(rho + &k3 * C64::from(h)));
        rho + (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0)
    }
}

fn check_frame(scenario: &Scenario) -> Result<()> {
    if scenario.frame != Frame::Rotating {
        return Err(Error::Config("the master-equation oracle runs in the rotating frame only".into()));
    }
    Ok(())
}

/// Instantaneous `d rho / dt` during `stage` (rotating frame).
pub fn liouvillian_apply(rho: &DensityMatrix, stage: StageKind, scenario: &Scenario) -> Result<CMatrix> {
    check_frame(scenario)?;
    let dims = cavity_dims(rho.layout())?;
    Ok(Generator::new(dims, stage, scenario).apply(rho.entries()))
}

/// `steps` fixed Runge-Kutta steps of total length `tau` inside `stage`.
pub fn fixed_step_evolve(
    rho: &DensityMatrix,
    stage: StageKind,
    tau: f64,
    steps: usize,
    scenario: &Scenario,
) -> Result<DensityMatrix> {
    check_frame(scenario)?;
    let generator = Generator::new(cavity_dims(rho.layout())?, stage, scenario);
    let h = tau / steps.max(1) as f64;
    let mut state = rho.entries().clone();
    for _ in 0..steps {
        state = generator.rk4(&state, h);
    }
    Ok(rho.map_entries(state))
}

struct Stepper {
    config: IntegratorConfig,
    h: f64,
}

impl Stepper {
    /// Integrates from `t` to `t_end` under one generator.
    fn advance(&mut self, generator: &Generator, mut rho: CMatrix, mut t: f64, t_end: f64) -> Result<CMatrix> {
        let cfg = self.config;
        while t_end - t > 1e-12 * t_end.abs().max(1.0) {
            let h = self.h.min(cfg.max_step).min(t_end - t);
            let full = generator.rk4(&rho, h);
            let half = generator.rk4(&generator.rk4(&rho, h / 2.0), h / 2.0);
            let err = linalg::max_abs(&(&half - &full)) / 15.0;
            let scale = if err > 0.0 { 0.9 * (cfg.tolerance / err).powf(0.2) } else { 4.0 };
            if err <= cfg.tolerance {
                let trace = half.trace();
                let drift = (trace.re - 1.0).abs().max(trace.im.abs());
                if drift > cfg.max_trace_drift {
                    return Err(Error::StepUnderflow {
                        t,
                        reason: format!("trace drift {drift:e} in one step; lower the tolerance"),
                    });
                }
                debug_assert!(linalg::hermiticity_error(&half) < 1e-12 * half.nrows() as f64);
                if drift > 1e-13 {
                    debug!("t = {t}: renormalizing trace drift {drift:e}");
                }
                rho = half.unscale(trace.re);
                t += h;
                if h == self.h.min(cfg.max_step) {
                    self.h = (h * scale.min(4.0)).min(cfg.max_step);
                }
            } else {
                self.h = h * scale.max(0.1);
                if self.h < cfg.min_step {
                    return Err(Error::StepUnderflow {
                        t,
                        reason: format!("step {:e} us below the minimum {:e} us", self.h, cfg.min_step),
                    });
                }
            }
        }
        Ok(rho)
    }
}

/// Integrates `rho0` through the stage plan, sampling at `grid`.
pub fn integrate(
    rho0: &DensityMatrix,
    plan: &StagePlan,
    grid: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    check_frame(&plan.scenario)?;
    let dims = cavity_dims(rho0.layout())?;
    let end = plan.end_time();
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Config("sample times must be sorted".into()));
    }
    if let (Some(&first), Some(&last)) = (grid.first(), grid.last()) {
        if first < -1e-9 || last > end + 1e-9 {
            return Err(Error::Config(format!("sample times [{first}, {last}] outside [0, {end}]")));
        }
    }
    let generators: Vec<Generator> = plan
        .segments
        .iter()
        .map(|s| Generator::new(dims, s.kind, &plan.scenario))
        .collect();
    let mut stepper = Stepper {
        config: *config,
        h: config.initial_step,
    };
    let mut trajectory = Trajectory::new(Backend::Oracle);
    let mut rho = rho0.entries().clone();
    let mut t = 0.0;
    let mut current = 0;
    for &sample in grid {
        let target = plan.segment_at(sample);
        while current < target {
            let seg = plan.segments[current];
            if seg.duration > 0.0 {
                rho = stepper.advance(&generators[current], rho, t, seg.end())?;
                t = seg.end();
            }
            current += 1;
        }
        let seg_end = plan.segments[current].end();
        let stop = sample.min(seg_end);
        if stop > t {
            rho = stepper.advance(&generators[current], rho, t, stop)?;
            t = stop;
        }
        let state = rho0.map_entries(linalg::hermitian_part(&rho));
        if state.min_eigenvalue() < -1e-7 {
            warn!("oracle state at t = {sample} has eigenvalue below -1e-7");
        }
        let obs = Observables::from_density(&state)?;
        trajectory.push(sample, Snapshot::Dense(state), obs);
    }
    Ok(trajectory)
}

/// Oracle evolution of the scenario's initial state.
pub fn oracle_run(scenario: &Scenario, grid: &[f64], config: &IntegratorConfig) -> Result<Trajectory> {
    scenario.validate()?;
    integrate(&initial_state(scenario)?, &StagePlan::new(scenario), grid, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, mean_photon_number, PureState, SubsystemLayout};
    use crate::linalg::{CVector, ONE};

    fn field_state(zeta: C64, n1: usize) -> DensityMatrix {
        // |g> (x) |zeta> (x) |0>
        let f = coherent_state(zeta, n1).unwrap();
        let mut psi = CVector::zeros(2 * (n1 + 1) * 2);
        for k in 0..=n1 {
            psi[(n1 + 1) * 2 + 2 * k] = f.amplitudes()[k];
        }
        PureState::new(SubsystemLayout::cavity(n1, 1), psi).unwrap().to_density()
    }

    #[test]
    fn zero_generator() {
        let mut s = Scenario::experimental();
        s.dispersive = [0.0; 2];
        s.coupling = [None; 2];
        let rho = field_state(C64::from(0.6), 10);
        let d = liouvillian_apply(&rho, StageKind::Cavity1, &s).unwrap();
        assert_eq!(linalg::max_abs(&d), 0.0);
    }

    #[test]
    fn vacuum_is_stationary_and_output_traceless() {
        let s = Scenario::experimental().with_relative_damping(1.0, 1.0);
        let rho = field_state(C64::from(0.0), 6);
        let d = liouvillian_apply(&rho, StageKind::Cavity1, &s).unwrap();
        assert!(linalg::max_abs(&d) < 1e-18);
        let rho = field_state(C64::new(0.7, -0.2), 15);
        let d = liouvillian_apply(&rho, StageKind::Cavity2, &s).unwrap();
        assert!(d.trace().norm() < 1e-12);
    }

    #[test]
    fn field_amplitude_decays_at_gamma() {
        let mut s = Scenario::experimental().with_relative_damping(2.0, 0.0);
        s.dispersive = [0.0; 2];
        s.coupling = [None; 2];
        let n1 = 30;
        let zeta = C64::new(0.8, 0.3);
        let rho = field_state(zeta, n1);
        let d = liouvillian_apply(&rho, StageKind::Cavity1, &s).unwrap();
        // <a> = sum_n sqrt(n) rho[n, n-1] in the |g, ., 0> block
        let mut da = C64::from(0.0);
        let base = (n1 + 1) * 2;
        for n in 1..=n1 {
            da += (n as f64).sqrt() * d[(base + 2 * n, base + 2 * (n - 1))];
        }
        assert!((da + zeta * s.gamma[0]).norm() < 1e-9);
    }

    #[test]
    fn photon_number_decay_law() {
        let mut s = Scenario::experimental().first_cavity_only(50.0);
        s.dispersive = [0.0; 2];
        s.coupling = [None; 2];
        s.gamma = [0.01, 0.0];
        let n1 = 20;
        s.initial = crate::evolution::InitialState::Density(field_state(ONE, n1));
        let traj = oracle_run(&s, &[50.0], &IntegratorConfig::default()).unwrap();
        let rho = traj.snapshots[0].density().unwrap();
        let n = mean_photon_number(&rho, 1).unwrap();
        assert!((n - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn lab_frame_rejected() {
        let s = Scenario::experimental().with_frame(Frame::Lab);
        assert!(matches!(oracle_run(&s, &[0.0], &IntegratorConfig::default()), Err(Error::Config(_))));
    }
}
