//! Fixed-format CSV output.
//!
//! Every float is written with 12 significant digits in scientific notation
//! so that a given configuration always produces the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cqed_core::analytic::PhaseSpacePoint;
use cqed_core::Trajectory;

use crate::error::{CliError, Result};

pub const HEADER: &str = "t_us,C_AF1,C_AF2,C_F1F2,discarded_weight,purity,flags";

pub const PHASE_SPACE_HEADER: &str = "t_us,re_alpha_e,im_alpha_e,re_alpha_g,im_alpha_g,chord";

/// Flag set when the effective two-qubit reduction discarded too much weight.
pub const FLAG_SUPPORT: &str = "support_deficient";

/// One row of a concurrence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceRecord {
    pub t: f64,
    pub c_af1: f64,
    pub c_af2: f64,
    pub c_f1f2: f64,
    /// Largest discarded weight over the three pairs.
    pub discarded_weight: f64,
    pub purity: f64,
    pub flags: Vec<&'static str>,
}

impl ConcurrenceRecord {
    pub fn concurrences(&self) -> [f64; 3] {
        [self.c_af1, self.c_af2, self.c_f1f2]
    }
}

pub fn records(trajectory: &Trajectory) -> Vec<ConcurrenceRecord> {
    trajectory
        .times
        .iter()
        .zip(&trajectory.observables)
        .map(|(&t, obs)| {
            let [c_af1, c_af2, c_f1f2] = obs.concurrences.as_array();
            ConcurrenceRecord {
                t,
                c_af1,
                c_af2,
                c_f1f2,
                discarded_weight: obs.discarded_weight.iter().copied().fold(0.0, f64::max),
                purity: obs.purity,
                flags: if obs.flagged() { vec![FLAG_SUPPORT] } else { Vec::new() },
            }
        })
        .collect()
}

/// `v` with 12 significant digits; negative zero is written as zero.
pub fn format_float(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

pub fn render(records: &[ConcurrenceRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in records {
        for v in [r.t, r.c_af1, r.c_af2, r.c_f1f2, r.discarded_weight, r.purity] {
            out.push_str(&format_float(v));
            out.push(',');
        }
        out.push_str(&r.flags.join(";"));
        out.push('\n');
    }
    out
}

pub fn render_phase_space(points: &[PhaseSpacePoint]) -> String {
    let mut out = String::new();
    out.push_str(PHASE_SPACE_HEADER);
    out.push('\n');
    for p in points {
        let row = [p.t, p.alpha_e.re, p.alpha_e.im, p.alpha_g.re, p.alpha_g.im, p.chord].map(format_float);
        writeln!(out, "{}", row.join(",")).expect("writing to a String");
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Parses a table written by [`render`].
pub fn parse(text: &str) -> Option<Vec<ConcurrenceRecord>> {
    let mut lines = text.lines();
    if lines.next()? != HEADER {
        return None;
    }
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return None;
            }
            let v: Vec<f64> = fields[..6].iter().map(|f| f.parse().ok()).collect::<Option<_>>()?;
            let flags = if fields[6].is_empty() { Vec::new() } else { vec![FLAG_SUPPORT] };
            Some(ConcurrenceRecord {
                t: v[0],
                c_af1: v[1],
                c_af2: v[2],
                c_f1f2: v[3],
                discarded_weight: v[4],
                purity: v[5],
                flags,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_twelve_significant_digits() {
        assert_eq!(format_float(0.5), "5.00000000000e-1");
        assert_eq!(format_float(-0.0), "0.00000000000e0");
        assert_eq!(format_float(251.327412287), "2.51327412287e2");
    }

    #[test]
    fn render_round_trips() {
        let r = ConcurrenceRecord {
            t: 1.5,
            c_af1: 0.25,
            c_af2: 0.0,
            c_f1f2: 1e-17,
            discarded_weight: 2e-3,
            purity: 0.875,
            flags: vec![FLAG_SUPPORT],
        };
        let text = render(std::slice::from_ref(&r));
        assert!(text.ends_with(",support_deficient\n"));
        assert_eq!(parse(&text).unwrap(), vec![r]);
    }
}
