use std::fmt;

use super::scenario::Scenario;

/// The five consecutive intervals of the atom's flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageKind {
    Cavity1,
    Free1,
    Ramsey,
    Free2,
    Cavity2,
}

impl StageKind {
    pub const ALL: [StageKind; 5] = [
        StageKind::Cavity1,
        StageKind::Free1,
        StageKind::Ramsey,
        StageKind::Free2,
        StageKind::Cavity2,
    ];

    pub fn index(self) -> usize {
        match self {
            StageKind::Cavity1 => 0,
            StageKind::Free1 => 1,
            StageKind::Ramsey => 2,
            StageKind::Free2 => 3,
            StageKind::Cavity2 => 4,
        }
    }

    /// Dispersive frequency acting on `field` (0 or 1) during this stage:
    /// `omega_1` only inside cavity 1, `omega_2` only inside cavity 2.
    pub fn active_dispersive(self, field: usize, scenario: &Scenario) -> f64 {
        match (self, field) {
            (StageKind::Cavity1, 0) | (StageKind::Cavity2, 1) => scenario.dispersive[field],
            _ => 0.0,
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            StageKind::Cavity1 => "cavity1",
            StageKind::Free1 => "free1",
            StageKind::Ramsey => "ramsey",
            StageKind::Free2 => "free2",
            StageKind::Cavity2 => "cavity2",
        };
        f.write_str(name)
    }
}

/// One stage placed on the time axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSegment {
    pub kind: StageKind,
    pub start: f64,
    pub duration: f64,
}

impl StageSegment {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Stage schedule of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePlan {
    pub scenario: Scenario,
    pub segments: Vec<StageSegment>,
}

impl StagePlan {
    pub fn new(scenario: &Scenario) -> Self {
        let bounds = scenario.stage_boundaries();
        let segments = StageKind::ALL
            .iter()
            .map(|&kind| StageSegment {
                kind,
                start: bounds[kind.index()],
                duration: scenario.duration(kind),
            })
            .collect();
        Self {
            scenario: scenario.clone(),
            segments,
        }
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, StageSegment::end)
    }

    /// Segment containing `t`. Boundary times belong to the earlier stage;
    /// zero-length stages are never selected except at `t = 0` when every
    /// stage is empty. Times past the end map to the last non-empty stage.
    pub fn segment_at(&self, t: f64) -> usize {
        self.segments
            .iter()
            .position(|s| t <= s.end() && s.duration > 0.0)
            .or_else(|| self.segments.iter().rposition(|s| s.duration > 0.0))
            .unwrap_or(0)
    }
}

/// Checks that sample times are sorted and lie in `[0, end]` (to 1e-9 us).
pub(crate) fn check_grid(grid: &[f64], end: f64) -> crate::Result<()> {
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(crate::Error::Config("sample times must be sorted".into()));
    }
    if let (Some(&first), Some(&last)) = (grid.first(), grid.last()) {
        if first < -1e-9 || last > end + 1e-9 {
            return Err(crate::Error::Config(format!(
                "sample times [{first}, {last}] outside [0, {end}]"
            )));
        }
    }
    Ok(())
}
