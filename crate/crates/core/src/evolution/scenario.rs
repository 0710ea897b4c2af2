use std::f64::consts::FRAC_PI_4;

use log::warn;

use crate::error::{Error, Result};
use crate::hilbert::{default_truncation, DensityMatrix, DEFAULT_TAIL_TOLERANCE};
use crate::linalg::C64;

use super::stage::StageKind;

/// Reference frame for the free Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    /// Interaction picture at the atomic and cavity frequencies.
    #[default]
    Rotating,
    /// Free-Hamiltonian phases kept explicitly.
    Lab,
}

/// Vacuum Rabi frequency and detuning of one cavity, rad/us.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub rabi: f64,
    pub detuning: f64,
}

impl Coupling {
    /// Dispersive frequency `rabi^2 / detuning`.
    pub fn dispersive_frequency(&self) -> f64 {
        self.rabi * self.rabi / self.detuning
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialState {
    /// `(|e> + e^{-i phi/2}|g>)/sqrt(2) (x) |alpha> (x) |beta>`.
    #[default]
    CoherentProduct,
    /// Arbitrary state on the (atom, field 1, field 2) layout. Only the
    /// dense and oracle backends accept it.
    Density(DensityMatrix),
}

/// Full parameter set of one run. Times in us, angular frequencies in
/// rad/us (the experimental "kHz" values are 10^3 rad/s, i.e. 1e-3 rad/us).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Atomic transition frequency.
    pub omega_a: f64,
    /// Cavity mode frequencies.
    pub cavity_frequency: [f64; 2],
    /// Dispersive frequencies `Omega_i^2 / Delta_i`.
    pub dispersive: [f64; 2],
    /// When present, must reproduce `dispersive`.
    pub coupling: [Option<Coupling>; 2],
    /// Field amplitude damping rates (photon loss rate is `2 gamma`).
    pub gamma: [f64; 2],
    /// Total Ramsey pulse area.
    pub ramsey_angle: f64,
    /// Initial relative atomic phase.
    pub phi: f64,
    pub alpha: C64,
    pub beta: C64,
    /// Durations of the five stages, in [`StageKind::ALL`] order.
    pub durations: [f64; 5],
    /// Fock cutoffs; `None` uses [`default_truncation`].
    pub truncation: [Option<usize>; 2],
    pub frame: Frame,
    pub tail_tolerance: f64,
    /// Dispersive-validity ratio below which a warning is emitted.
    pub validity_threshold: f64,
    pub initial: InitialState,
}

pub const DEFAULT_OMEGA_A: f64 = 5.11e4;
pub const DEFAULT_RABI: f64 = 0.025;
pub const DEFAULT_DETUNING: f64 = 0.1;
pub const DEFAULT_DURATIONS: [f64; 5] = [30.0, 10.0, 10.0, 10.0, 30.0];

impl Default for Scenario {
    fn default() -> Self {
        Self::experimental()
    }
}

impl Scenario {
    /// Experimental parameter set: dispersive frequencies 6.25e-3 rad/us,
    /// detunings 0.1 rad/us, Rabi frequencies 0.025 rad/us, 30 us in each
    /// cavity, alpha = beta = 0.5, ideal cavities, pi/2 Ramsey pulse.
    pub fn experimental() -> Self {
        let coupling = Coupling {
            rabi: DEFAULT_RABI,
            detuning: DEFAULT_DETUNING,
        };
        let omega = coupling.dispersive_frequency();
        Self {
            omega_a: DEFAULT_OMEGA_A,
            cavity_frequency: [DEFAULT_OMEGA_A - DEFAULT_DETUNING; 2],
            dispersive: [omega; 2],
            coupling: [Some(coupling); 2],
            gamma: [0.0; 2],
            ramsey_angle: FRAC_PI_4,
            phi: 0.0,
            alpha: C64::from(0.5),
            beta: C64::from(0.5),
            durations: DEFAULT_DURATIONS,
            truncation: [None; 2],
            frame: Frame::Rotating,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            validity_threshold: 2.0,
            initial: InitialState::CoherentProduct,
        }
    }

    /// Sets `gamma_1 = g |omega_1|`, `gamma_2 = q |omega_2|`.
    pub fn with_relative_damping(mut self, g: f64, q: f64) -> Self {
        self.gamma = [g * self.dispersive[0].abs(), q * self.dispersive[1].abs()];
        self
    }

    pub fn with_amplitudes(mut self, alpha: C64, beta: C64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_truncation(mut self, n1: usize, n2: usize) -> Self {
        self.truncation = [Some(n1), Some(n2)];
        self
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    /// Only the first cavity, for `duration` us.
    pub fn first_cavity_only(mut self, duration: f64) -> Self {
        self.durations = [duration, 0.0, 0.0, 0.0, 0.0];
        self
    }

    pub fn truncations(&self) -> [usize; 2] {
        if let InitialState::Density(rho) = &self.initial {
            let dims = rho.layout().dims();
            return [dims[1] - 1, dims[2] - 1];
        }
        [
            self.truncation[0].unwrap_or_else(|| default_truncation(self.alpha)),
            self.truncation[1].unwrap_or_else(|| default_truncation(self.beta)),
        ]
    }

    /// Stage boundaries `t_0 = 0, t_1, ..., t_5`.
    pub fn stage_boundaries(&self) -> [f64; 6] {
        let mut t = [0.0; 6];
        for k in 0..5 {
            t[k + 1] = t[k] + self.durations[k];
        }
        t
    }

    pub fn end_time(&self) -> f64 {
        self.durations.iter().sum()
    }

    pub fn duration(&self, stage: StageKind) -> f64 {
        self.durations[stage.index()]
    }

    /// Ramsey pulse area accumulated after `tau` us in the Ramsey stage.
    pub fn ramsey_area(&self, tau: f64) -> f64 {
        let d = self.duration(StageKind::Ramsey);
        if d > 0.0 {
            self.ramsey_angle * tau / d
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be finite, got {v}")))
            }
        };
        finite("omega_a", self.omega_a)?;
        finite("ramsey_angle", self.ramsey_angle)?;
        finite("phi", self.phi)?;
        for i in 0..2 {
            finite("cavity frequency", self.cavity_frequency[i])?;
            finite("dispersive frequency", self.dispersive[i])?;
            if !(self.gamma[i] >= 0.0 && self.gamma[i].is_finite()) {
                return Err(Error::Config(format!(
                    "gamma_{} must be a non-negative rate, got {}",
                    i + 1,
                    self.gamma[i]
                )));
            }
            if let Some(c) = self.coupling[i] {
                if c.detuning == 0.0 || !c.detuning.is_finite() || !c.rabi.is_finite() {
                    return Err(Error::Config(format!(
                        "cavity {} needs a finite non-zero detuning",
                        i + 1
                    )));
                }
                let expected = c.dispersive_frequency();
                let scale = expected.abs().max(self.dispersive[i].abs()).max(f64::MIN_POSITIVE);
                if (expected - self.dispersive[i]).abs() > 1e-9 * scale {
                    return Err(Error::Config(format!(
                        "omega_{i1} = {} is inconsistent with Omega_{i1}^2/Delta_{i1} = {expected}",
                        self.dispersive[i],
                        i1 = i + 1
                    )));
                }
            }
            if self.truncation[i] == Some(0) {
                return Err(Error::Config("truncations must be at least 1".into()));
            }
        }
        for (k, d) in self.durations.iter().enumerate() {
            if !(*d >= 0.0 && d.is_finite()) {
                return Err(Error::Config(format!(
                    "stage {} duration must be non-negative, got {d}",
                    k + 1
                )));
            }
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::Config("tail tolerance must be positive".into()));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::Config("coherent amplitudes must be finite".into()));
        }
        if let InitialState::Density(rho) = &self.initial {
            let dims = rho.layout().dims();
            if dims.len() != 3 || dims[0] != 2 {
                return Err(Error::Config(
                    "initial density matrix must live on (atom, field 1, field 2)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Dispersive-approximation diagnostic `|Delta| / (Omega sqrt(n + 1))`
/// with `n = |amplitude|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveValidity {
    /// `None` when the cavity has no explicit coupling.
    pub ratio: [Option<f64>; 2],
    pub warning: [bool; 2],
}

pub fn dispersive_validity(scenario: &Scenario) -> DispersiveValidity {
    let amps = [scenario.alpha, scenario.beta];
    let mut ratio = [None; 2];
    let mut warning = [false; 2];
    for i in 0..2 {
        if let Some(c) = scenario.coupling[i] {
            let r = if c.rabi == 0.0 {
                f64::INFINITY
            } else {
                c.detuning.abs() / (c.rabi.abs() * (amps[i].norm_sqr() + 1.0).sqrt())
            };
            ratio[i] = Some(r);
            if r < scenario.validity_threshold {
                warning[i] = true;
                warn!(
                    "cavity {}: dispersive ratio {r:.3} below {}; the dispersive Hamiltonian may not hold",
                    i + 1,
                    scenario.validity_threshold
                );
            }
        }
    }
    DispersiveValidity { ratio, warning }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experimental_defaults_are_consistent() {
        let s = Scenario::experimental();
        s.validate().unwrap();
        assert!((s.dispersive[0] - 6.25e-3).abs() < 1e-15);
        assert_eq!(s.stage_boundaries(), [0.0, 30.0, 40.0, 50.0, 60.0, 90.0]);
        assert_eq!(s.truncations(), [11, 11]);
    }

    #[test]
    fn negative_rate_rejected() {
        let mut s = Scenario::experimental();
        s.gamma[0] = -1.0;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn inconsistent_dispersive_frequency_rejected() {
        let mut s = Scenario::experimental();
        s.dispersive[0] = 5e-3;
        assert!(s.validate().is_err());
        s.coupling[0] = None;
        s.validate().unwrap();
    }

    #[test]
    fn validity_ratio_examples() {
        let mut s = Scenario::experimental().with_amplitudes(C64::from(0.0), C64::from(0.0));
        let v = dispersive_validity(&s);
        assert!((v.ratio[0].unwrap() - 4.0).abs() < 1e-12);
        assert!(!v.warning[0]);

        s.alpha = C64::from(15f64.sqrt());
        let v = dispersive_validity(&s);
        assert!((v.ratio[0].unwrap() - 1.0).abs() < 1e-12);
        assert!(v.warning[0]);

        s.coupling[0] = Some(Coupling { rabi: 0.0, detuning: 0.1 });
        let v = dispersive_validity(&s);
        assert_eq!(v.ratio[0], Some(f64::INFINITY));
        assert!(!v.warning[0]);
    }
}
