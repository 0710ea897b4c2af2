use std::fmt;

use crate::error::{Error, Result};

/// Role of one tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Atom,
    Field1,
    Field2,
    /// Generic two-level factor (test states, effective field qubits).
    Qubit,
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Subsystem::Atom => "atom",
            Subsystem::Field1 => "field1",
            Subsystem::Field2 => "field2",
            Subsystem::Qubit => "qubit",
        };
        f.write_str(name)
    }
}

/// Ordered tensor structure of a state space. Index 0 is the slowest-varying
/// factor in the flattened basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    labels: Vec<Subsystem>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>, labels: Vec<Subsystem>) -> Result<Self> {
        if dims.len() != labels.len() {
            return Err(Error::Layout(format!(
                "{} dimensions for {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Layout(format!("invalid dimensions {dims:?}")));
        }
        for (d, l) in dims.iter().zip(&labels) {
            if matches!(l, Subsystem::Atom | Subsystem::Qubit) && *d != 2 {
                return Err(Error::Layout(format!("{l} must have dimension 2, got {d}")));
            }
        }
        Ok(Self { dims, labels })
    }

    /// The (atom, field 1, field 2) layout with Fock cutoffs `n1`, `n2`.
    pub fn cavity(n1: usize, n2: usize) -> Self {
        Self {
            dims: vec![2, n1 + 1, n2 + 1],
            labels: vec![Subsystem::Atom, Subsystem::Field1, Subsystem::Field2],
        }
    }

    pub fn single(label: Subsystem, dim: usize) -> Result<Self> {
        Self::new(vec![dim], vec![label])
    }

    pub fn qubits(count: usize) -> Self {
        Self {
            dims: vec![2; count],
            labels: vec![Subsystem::Qubit; count],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[Subsystem] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: Subsystem) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Distance in the flattened index between neighbouring levels of
    /// subsystem `index`.
    pub fn stride(&self, index: usize) -> usize {
        self.dims[index + 1..].iter().product()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self { dims, labels }
    }

    /// Layout restricted to the subsystems listed in `keep` (in layout order).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Self {
            dims: sorted.iter().map(|&i| self.dims[i]).collect(),
            labels: sorted.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn relabel(&self, labels: Vec<Subsystem>) -> Result<Self> {
        Self::new(self.dims.clone(), labels)
    }
}
