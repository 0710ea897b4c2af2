//! Line-oriented `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Lists are comma separated.
//! Complex amplitudes use the `re+imi` form (`0.5`, `1+0.5i`, `-0.3i`).
//! Absent keys take the experimental defaults of [`Scenario::experimental`].

use std::collections::BTreeMap;
use std::str::FromStr;

use cqed_core::evolution::{Coupling, DEFAULT_DETUNING, DEFAULT_RABI};
use cqed_core::{Backend, Frame, Scenario, C64};

use crate::error::{CliError, Result};

/// Uniform sample count used when neither `times` nor `samples` is given.
pub const DEFAULT_SAMPLES: usize = 181;

const KEYS: &[&str] = &[
    "omega_a",
    "omega_tilde_1",
    "omega_tilde_2",
    "omega_1",
    "omega_2",
    "Omega_1",
    "Omega_2",
    "Delta_1",
    "Delta_2",
    "gamma_1",
    "gamma_2",
    "g",
    "q",
    "ramsey_angle",
    "phi",
    "alpha",
    "beta",
    "stage_durations",
    "truncations",
    "frame",
    "tail_tolerance",
    "times",
    "samples",
    "backend",
];

/// Parameter grid of a sweep. `g` and `q` set `gamma_1 = g |omega_1|` and
/// `gamma_2 = q |omega_2|`; `None` keeps the absolute rates of the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub g: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    pub times: Vec<f64>,
    pub backend: Backend,
}

impl SweepSpec {
    /// Single-point spec sampling `scenario` uniformly.
    pub fn single(scenario: &Scenario, samples: usize, backend: Backend) -> Self {
        Self {
            g: None,
            q: None,
            alpha: vec![scenario.alpha],
            beta: vec![scenario.beta],
            times: uniform_grid(scenario.end_time(), samples),
            backend,
        }
    }
}

/// Parsed configuration: the base scenario (first value of every list) and
/// the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub sweep: SweepSpec,
}

/// `samples` points spaced evenly on `[0, end]`.
pub fn uniform_grid(end: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![end],
        _ => (0..samples)
            .map(|k| end * k as f64 / (samples - 1) as f64)
            .collect(),
    }
}

pub fn parse_backend(text: &str) -> Option<Backend> {
    match text {
        "dense" => Some(Backend::Dense),
        "branch" => Some(Backend::Branch),
        "oracle" => Some(Backend::Oracle),
        _ => None,
    }
}

struct Entry<'a> {
    value: &'a str,
    line: usize,
}

struct Entries<'a>(BTreeMap<&'a str, Entry<'a>>);

impl<'a> Entries<'a> {
    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |e| e.line)
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn scalar<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some(entry) = self.0.get(key) else {
            return Ok(None);
        };
        entry
            .value
            .parse()
            .map(Some)
            .map_err(|_| CliError::config(key, entry.line, format!("cannot parse '{}'", entry.value)))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(entry) = self.0.get(key) else {
            return Ok(None);
        };
        let items = entry
            .value
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse()
                    .map_err(|_| CliError::config(key, entry.line, format!("cannot parse '{item}'")))
            })
            .collect::<Result<Vec<T>>>()?;
        if items.is_empty() {
            return Err(CliError::config(key, entry.line, "empty list"));
        }
        Ok(Some(items))
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        match self.scalar::<f64>(key)? {
            Some(v) if !v.is_finite() => Err(CliError::config(key, self.line(key), "must be finite")),
            v => Ok(v),
        }
    }

    fn non_negative(&self, key: &str) -> Result<Option<f64>> {
        match self.real(key)? {
            Some(v) if v < 0.0 => Err(CliError::config(key, self.line(key), format!("must be non-negative, got {v}"))),
            v => Ok(v),
        }
    }
}

fn tokenize(text: &str) -> Result<Entries<'_>> {
    let mut map = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::config(content, line, "expected 'key = value'"));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(CliError::config(key, line, "unknown key"));
        }
        if value.is_empty() {
            return Err(CliError::config(key, line, "missing value"));
        }
        if let Some(previous) = map.insert(key, Entry { value, line }) {
            return Err(CliError::config(key, line, format!("already set on line {}", previous.line)));
        }
    }
    Ok(Entries(map))
}

fn relative_rates(entries: &Entries, relative: &str, absolute: &str) -> Result<Option<Vec<f64>>> {
    let Some(values) = entries.list::<f64>(relative)? else {
        return Ok(None);
    };
    if entries.has(absolute) {
        return Err(CliError::config(
            relative,
            entries.line(relative),
            format!("conflicts with {absolute} on line {}", entries.line(absolute)),
        ));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(CliError::config(relative, entries.line(relative), format!("must be non-negative, got {v}")));
    }
    Ok(Some(values))
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = tokenize(text)?;
    let mut s = Scenario::experimental();

    if let Some(v) = e.real("omega_a")? {
        s.omega_a = v;
    }
    for i in 0..2 {
        let n = i + 1;
        let (omega_key, rabi_key, detuning_key) = (format!("omega_{n}"), format!("Omega_{n}"), format!("Delta_{n}"));
        let omega = e.real(&omega_key)?;
        let rabi = e.real(&rabi_key)?;
        let detuning = e.real(&detuning_key)?;
        if detuning == Some(0.0) {
            return Err(CliError::config(&detuning_key, e.line(&detuning_key), "must be non-zero"));
        }
        let explicit_coupling = rabi.is_some() || detuning.is_some();
        if explicit_coupling || omega.is_none() {
            let coupling = Coupling {
                rabi: rabi.unwrap_or(DEFAULT_RABI),
                detuning: detuning.unwrap_or(DEFAULT_DETUNING),
            };
            let implied = coupling.dispersive_frequency();
            if let Some(w) = omega {
                let scale = implied.abs().max(w.abs()).max(f64::MIN_POSITIVE);
                if (w - implied).abs() > 1e-9 * scale {
                    return Err(CliError::config(
                        &omega_key,
                        e.line(&omega_key),
                        format!("{w} is inconsistent with {rabi_key}^2/{detuning_key} = {implied}"),
                    ));
                }
            }
            s.coupling[i] = Some(coupling);
            s.dispersive[i] = implied;
        } else if let Some(w) = omega {
            s.coupling[i] = None;
            s.dispersive[i] = w;
        }
        let tilde_key = format!("omega_tilde_{n}");
        s.cavity_frequency[i] = match e.real(&tilde_key)? {
            Some(v) => v,
            None => s.omega_a - detuning.unwrap_or(DEFAULT_DETUNING),
        };
        if let Some(v) = e.non_negative(&format!("gamma_{n}"))? {
            s.gamma[i] = v;
        }
    }

    let g = relative_rates(&e, "g", "gamma_1")?;
    let q = relative_rates(&e, "q", "gamma_2")?;
    if let Some(g) = &g {
        s.gamma[0] = g[0] * s.dispersive[0].abs();
    }
    if let Some(q) = &q {
        s.gamma[1] = q[0] * s.dispersive[1].abs();
    }

    if let Some(v) = e.real("ramsey_angle")? {
        s.ramsey_angle = v;
    }
    if let Some(v) = e.real("phi")? {
        s.phi = v;
    }
    let alpha = e.list::<C64>("alpha")?.unwrap_or_else(|| vec![s.alpha]);
    let beta = e.list::<C64>("beta")?.unwrap_or_else(|| vec![s.beta]);
    for (key, values) in [("alpha", &alpha), ("beta", &beta)] {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::config(key, e.line(key), "amplitudes must be finite"));
        }
    }
    s.alpha = alpha[0];
    s.beta = beta[0];

    if let Some(d) = e.list::<f64>("stage_durations")? {
        let line = e.line("stage_durations");
        let durations: [f64; 5] = d
            .try_into()
            .map_err(|d: Vec<f64>| CliError::config("stage_durations", line, format!("expected 5 values, got {}", d.len())))?;
        if let Some(v) = durations.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(CliError::config("stage_durations", line, format!("must be non-negative, got {v}")));
        }
        s.durations = durations;
    }
    if let Some(n) = e.list::<usize>("truncations")? {
        let line = e.line("truncations");
        match n[..] {
            [n1, n2] if n1 > 0 && n2 > 0 => s.truncation = [Some(n1), Some(n2)],
            _ => return Err(CliError::config("truncations", line, "expected two positive cutoffs N1,N2")),
        }
    }
    if let Some(frame) = e.0.get("frame") {
        s.frame = match frame.value {
            "lab" => Frame::Lab,
            "rotating" => Frame::Rotating,
            other => return Err(CliError::config("frame", frame.line, format!("expected lab or rotating, got '{other}'"))),
        };
    }
    if let Some(v) = e.real("tail_tolerance")? {
        if v <= 0.0 {
            return Err(CliError::config("tail_tolerance", e.line("tail_tolerance"), "must be positive"));
        }
        s.tail_tolerance = v;
    }

    let end = s.end_time();
    let times = match (e.list::<f64>("times")?, e.scalar::<usize>("samples")?) {
        (Some(_), Some(_)) => {
            return Err(CliError::config("samples", e.line("samples"), "conflicts with times"));
        }
        (Some(times), None) => {
            let line = e.line("times");
            if times.iter().any(|t| !(t.is_finite() && *t >= 0.0 && *t <= end)) {
                return Err(CliError::config("times", line, format!("sample times must lie in [0, {end}]")));
            }
            if times.windows(2).any(|w| w[1] < w[0]) {
                return Err(CliError::config("times", line, "sample times must be sorted"));
            }
            times
        }
        (None, Some(0)) => return Err(CliError::config("samples", e.line("samples"), "must be positive")),
        (None, samples) => uniform_grid(end, samples.unwrap_or(DEFAULT_SAMPLES)),
    };
    let backend = match e.0.get("backend") {
        None => Backend::Branch,
        Some(entry) => parse_backend(entry.value).ok_or_else(|| {
            CliError::config("backend", entry.line, format!("expected dense, branch or oracle, got '{}'", entry.value))
        })?,
    };

    s.validate().map_err(|err| CliError::config("scenario", 0, err.to_string()))?;
    Ok(RunConfig {
        scenario: s,
        sweep: SweepSpec {
            g,
            q,
            alpha,
            beta,
            times,
            backend,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_experimental_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.scenario, Scenario::experimental());
        assert_eq!(cfg.sweep.times.len(), DEFAULT_SAMPLES);
        assert_eq!(cfg.sweep.backend, Backend::Branch);
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let cfg = parse_config("# header\n\n  phi = 0.3   # trailing\n").unwrap();
        assert_eq!(cfg.scenario.phi, 0.3);
    }

    #[test]
    fn errors_carry_key_and_line() {
        match parse_config("phi = 1\nfoo = 2\n") {
            Err(CliError::Config { key, line, .. }) => assert_eq!((key.as_str(), line), ("foo", 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        assert!(matches!(parse_config("phi = 1\nphi = 2"), Err(CliError::Config { line: 2, .. })));
    }

    #[test]
    fn complex_amplitudes_parse() {
        let cfg = parse_config("alpha = 1+0.5i, -0.3i").unwrap();
        assert_eq!(cfg.sweep.alpha, vec![C64::new(1.0, 0.5), C64::new(0.0, -0.3)]);
        assert_eq!(cfg.scenario.alpha, C64::new(1.0, 0.5));
    }

    #[test]
    fn lone_dispersive_frequency_drops_the_coupling() {
        let cfg = parse_config("omega_2 = 0.01").unwrap();
        assert_eq!(cfg.scenario.dispersive[1], 0.01);
        assert_eq!(cfg.scenario.coupling[1], None);
    }

    #[test]
    fn relative_and_absolute_rates_conflict() {
        assert!(matches!(parse_config("g = 0.5\ngamma_1 = 1e-3"), Err(CliError::Config { .. })));
    }
}
