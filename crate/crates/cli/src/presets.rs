//! Named scenario families for the standard figure data sets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use rayon::prelude::*;

use cqed_core::analytic::phase_space_trajectory;
use cqed_core::{Backend, Scenario, C64};

use crate::config::{uniform_grid, SweepSpec};
use crate::csv;
use crate::error::{CliError, Result};
use crate::sweep::{pool, run_point, sweep_points, RunOptions, SweepPoint};

/// Relative damping values `g = gamma_1/omega_1` and `q = gamma_2/omega_2`.
pub const RATES: [f64; 4] = [0.0, 0.05, 0.5, 1.0];

/// Initial coherent amplitudes.
pub const AMPLITUDES: [f64; 3] = [0.5, 1.0, 2.0];

/// Single-cavity duration of the long first-cavity run, us.
pub const LONG_CAVITY: f64 = 1000.0;

/// Relative damping of the damped phase-space curve.
pub const PHASE_SPACE_DAMPING: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Long first-cavity run over amplitudes and damping, plus phase space.
    Fig2,
    /// Ideal first cavity, damping of the second cavity varied.
    Fig4,
    /// Ideal second cavity, damping of the first cavity varied.
    Fig5,
    /// Both cavities damped equally.
    Fig6,
    /// Damped second cavity for several field-2 amplitudes.
    Fig7,
    /// Every amplitude and damping combination.
    Full,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::Fig2, Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7, Preset::Full];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Full => "full",
        }
    }

    /// Sample grid shared by the curves of this preset.
    pub fn times(self) -> Vec<f64> {
        match self {
            Preset::Fig2 => uniform_grid(LONG_CAVITY, 401),
            _ => uniform_grid(Scenario::experimental().end_time(), 181),
        }
    }

    /// Parameter tuples of the preset, with the damping applied.
    pub fn points(self, options: &RunOptions) -> Vec<SweepPoint> {
        let reals = |v: &[f64]| v.iter().map(|&x| C64::from(x)).collect::<Vec<_>>();
        let one = vec![C64::from(1.0)];
        let (base, g, q, alpha, beta) = match self {
            Preset::Fig2 => (
                Scenario::experimental().first_cavity_only(LONG_CAVITY),
                RATES.to_vec(),
                vec![0.0],
                reals(&AMPLITUDES),
                vec![C64::from(0.0)],
            ),
            Preset::Fig4 => (Scenario::experimental(), vec![0.0], RATES.to_vec(), one.clone(), one),
            Preset::Fig5 => (Scenario::experimental(), RATES.to_vec(), vec![0.0], one.clone(), one),
            Preset::Fig6 => {
                let spec = |r: f64| SweepSpec {
                    g: Some(vec![r]),
                    q: Some(vec![r]),
                    alpha: one.clone(),
                    beta: one.clone(),
                    times: Vec::new(),
                    backend: Backend::Branch,
                };
                return RATES
                    .iter()
                    .flat_map(|&r| sweep_points(&Scenario::experimental(), &spec(r), options))
                    .collect();
            }
            Preset::Fig7 => (Scenario::experimental(), vec![0.0], vec![0.5, 1.0], one, reals(&AMPLITUDES)),
            Preset::Full => (
                Scenario::experimental(),
                RATES.to_vec(),
                RATES.to_vec(),
                reals(&AMPLITUDES),
                reals(&AMPLITUDES),
            ),
        };
        let spec = SweepSpec {
            g: Some(g),
            q: Some(q),
            alpha,
            beta,
            times: Vec::new(),
            backend: Backend::Branch,
        };
        sweep_points(&base, &spec, options)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown preset '{s}'; expected fig2, fig4, fig5, fig6, fig7 or full")))
    }
}

/// Writes the phase-space files of the long first-cavity run for `alpha = 1`.
fn write_phase_space(dir: &Path) -> Result<Vec<PathBuf>> {
    let times = uniform_grid(LONG_CAVITY, 401);
    [0.0, PHASE_SPACE_DAMPING]
        .into_iter()
        .map(|g| {
            let s = Scenario::experimental()
                .first_cavity_only(LONG_CAVITY)
                .with_amplitudes(C64::from(1.0), C64::from(0.0))
                .with_relative_damping(g, 0.0);
            let path = dir.join(format!("phase_space_a1_g{g}.csv"));
            csv::write_file(&path, &csv::render_phase_space(&phase_space_trajectory(&s, &times)))?;
            Ok(path)
        })
        .collect()
}

/// Runs every curve of `preset` into `<out>/<preset name>/`. The branch
/// backend is used unless overridden.
pub fn run_preset(preset: Preset, out: &Path, options: &RunOptions) -> Result<Vec<PathBuf>> {
    let dir = out.join(preset.name());
    let times = preset.times();
    let points = preset.points(options);
    info!("preset {preset}: {} curves", points.len());
    let mut paths: Vec<PathBuf> = pool(options.jobs)?.install(|| {
        points
            .par_iter()
            .map(|point| {
                let trajectory = run_point(&point.scenario, &times, Backend::Branch, options)?;
                let path = dir.join(point.file_name());
                csv::write_file(&path, &csv::render(&csv::records(&trajectory)))?;
                Ok(path)
            })
            .collect::<Result<_>>()
    })?;
    if preset == Preset::Fig2 {
        paths.extend(write_phase_space(&dir)?);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("fig3".parse::<Preset>().is_err());
    }

    #[test]
    fn curve_counts() {
        let o = RunOptions::default();
        let counts: Vec<usize> = Preset::ALL.iter().map(|p| p.points(&o).len()).collect();
        assert_eq!(counts, vec![12, 4, 4, 4, 6, 144]);
    }

    #[test]
    fn diagonal_preset_damps_both_cavities() {
        let points = Preset::Fig6.points(&RunOptions::default());
        for (p, r) in points.iter().zip(RATES) {
            assert_eq!((p.g, p.q), (Some(r), Some(r)));
        }
    }
}
