//! Coherent states in a truncated Fock basis.

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

use super::layout::{Subsystem, SubsystemLayout};
use super::state::PureState;

/// Default tolerated photon-number tail mass beyond the cutoff.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// Fock coefficients `e^{-|a|^2/2} a^n / sqrt(n!)` for `n = 0..=truncation`,
/// without renormalization.
pub fn coherent_coefficients(amplitude: C64, truncation: usize) -> CVector {
    let mut coeffs = CVector::zeros(truncation + 1);
    let mut c = C64::from((-0.5 * amplitude.norm_sqr()).exp());
    coeffs[0] = c;
    for n in 1..=truncation {
        c = c * amplitude / (n as f64).sqrt();
        coeffs[n] = c;
    }
    coeffs
}

/// Poisson probability mass of photon numbers above `truncation` for a
/// coherent state of amplitude `amplitude`, summed term by term.
pub fn tail_mass(amplitude: C64, truncation: usize) -> f64 {
    let mean = amplitude.norm_sqr();
    if mean == 0.0 {
        return 0.0;
    }
    let mut p = (-mean).exp();
    for n in 1..=truncation {
        p *= mean / n as f64;
    }
    let mut tail = 0.0;
    let mut n = truncation + 1;
    loop {
        p *= mean / n as f64;
        tail += p;
        // terms decrease geometrically once n > mean
        if p == 0.0 || (n as f64 > mean && p <= tail * 1e-17) {
            break;
        }
        n += 1;
    }
    tail
}

/// Normalized coherent state `|amplitude>` on `0..=truncation` photons.
///
/// The state is renormalized after truncation. Fails with
/// [`Error::TruncationTooSmall`] when the discarded Poisson tail exceeds
/// `tolerance`.
pub fn coherent_state_with_tolerance(
    amplitude: C64,
    truncation: usize,
    tolerance: f64,
) -> Result<PureState> {
    let amplitudes = checked_coherent_vector(amplitude, truncation, tolerance)?;
    let layout = SubsystemLayout::single(Subsystem::Field1, truncation + 1)?;
    PureState::normalized(layout, amplitudes)
}

/// [`coherent_state_with_tolerance`] at [`DEFAULT_TAIL_TOLERANCE`]. The
/// layout is labelled [`Subsystem::Field1`]; relabel for other slots.
pub fn coherent_state(amplitude: C64, truncation: usize) -> Result<PureState> {
    coherent_state_with_tolerance(amplitude, truncation, DEFAULT_TAIL_TOLERANCE)
}

pub(crate) fn checked_coherent_vector(
    amplitude: C64,
    truncation: usize,
    tolerance: f64,
) -> Result<CVector> {
    if truncation < 1 {
        return Err(Error::TruncationTooSmall {
            amplitude: amplitude.to_string(),
            truncation,
            tail: tail_mass(amplitude, truncation),
            tolerance,
        });
    }
    let tail = tail_mass(amplitude, truncation);
    if tail > tolerance {
        return Err(Error::TruncationTooSmall {
            amplitude: amplitude.to_string(),
            truncation,
            tail,
            tolerance,
        });
    }
    let coeffs = coherent_coefficients(amplitude, truncation);
    let norm = coeffs.norm();
    Ok(coeffs.unscale(norm))
}

/// Exact overlap `<a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)` of two
/// untruncated coherent states.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b).exp()
}

/// Default Fock cutoff `ceil(|a|^2 + 8|a| + 6)`.
pub fn default_truncation(amplitude: C64) -> usize {
    let r = amplitude.norm();
    (r * r + 8.0 * r + 6.0).ceil() as usize
}

/// Smallest cutoff whose Poisson tail is at most `tail`.
pub fn truncation_for_tail(amplitude: C64, tail: f64) -> usize {
    let mut n = 1;
    while tail_mass(amplitude, n) > tail {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_is_vacuum() {
        let psi = coherent_state(C64::from(0.0), 10).unwrap();
        assert_eq!(psi.amplitudes().len(), 11);
        assert_eq!(psi.amplitudes()[0], C64::from(1.0));
        assert!(psi.amplitudes().iter().skip(1).all(|z| *z == C64::from(0.0)));
    }

    #[test]
    fn mean_photon_number_is_amplitude_squared() {
        let psi = coherent_state(C64::from(1.0), 20).unwrap();
        let mean: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum();
        assert!((mean - 1.0).abs() < 1e-9);
    }

    #[test]
    fn amplitude_two_needs_more_than_eight_photons() {
        // Poisson(4) mass above n = 8, summed directly
        let mut p = (-4.0f64).exp();
        let mut head = p;
        for n in 1..=8 {
            p *= 4.0 / n as f64;
            head += p;
        }
        let oracle_tail = 1.0 - head;
        assert!(oracle_tail > 1e-10);
        assert!((tail_mass(C64::from(2.0), 8) - oracle_tail).abs() < 1e-12);
        assert!(matches!(
            coherent_state(C64::from(2.0), 8),
            Err(Error::TruncationTooSmall { truncation: 8, .. })
        ));
    }

    #[test]
    fn overlap_of_opposite_amplitudes() {
        let exact = coherent_overlap(C64::from(1.0), C64::from(-1.0));
        assert!((exact - C64::from((-2.0f64).exp())).norm() < 1e-15);
        // cross-check against truncated vectors at N = 40
        let a = coherent_coefficients(C64::from(1.0), 40);
        let b = coherent_coefficients(C64::from(-1.0), 40);
        assert!((a.dotc(&b) - exact).norm() < 1e-14);
    }

    #[test]
    fn overlap_identities() {
        assert!((coherent_overlap(C64::from(0.0), C64::from(0.0)) - C64::from(1.0)).norm() < 1e-15);
        let a = C64::new(0.7, -1.3);
        assert!((coherent_overlap(a, a) - C64::from(1.0)).norm() < 1e-14);
    }

    #[test]
    fn default_truncation_rule() {
        assert_eq!(default_truncation(C64::from(0.5)), 11);
        assert_eq!(default_truncation(C64::from(1.0)), 15);
        assert_eq!(default_truncation(C64::from(2.0)), 26);
    }

    #[test]
    fn truncation_for_tail_is_minimal() {
        let n = truncation_for_tail(C64::from(2.0), 1e-18);
        assert!(tail_mass(C64::from(2.0), n) <= 1e-18);
        assert!(tail_mass(C64::from(2.0), n - 1) > 1e-18);
    }
}
