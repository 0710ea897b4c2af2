use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};

use super::layout::SubsystemLayout;

/// Maximum tolerated `|rho - rho^dagger|` entry.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
/// Maximum tolerated `|Tr rho - 1|`.
pub const TRACE_TOLERANCE: f64 = 1e-10;
/// Most negative eigenvalue accepted as numerically zero.
pub const POSITIVITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: SubsystemLayout,
    amplitudes: CVector,
}

impl PureState {
    /// Fails unless the vector has unit norm within `1e-10`.
    pub fn new(layout: SubsystemLayout, amplitudes: CVector) -> Result<Self> {
        check_dim(&layout, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::NonPhysicalState(format!("state norm {norm}")));
        }
        Ok(Self { layout, amplitudes })
    }

    pub fn normalized(layout: SubsystemLayout, amplitudes: CVector) -> Result<Self> {
        check_dim(&layout, amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NonPhysicalState("zero or non-finite vector".into()));
        }
        Ok(Self {
            layout,
            amplitudes: amplitudes.unscale(norm),
        })
    }

    /// Computational basis state `index`.
    pub fn basis(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(Error::Layout(format!("basis index {index} >= {dim}")));
        }
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = linalg::ONE;
        Ok(Self { layout, amplitudes })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn relabel(self, labels: Vec<crate::hilbert::Subsystem>) -> Result<Self> {
        Ok(Self {
            layout: self.layout.relabel(labels)?,
            amplitudes: self.amplitudes,
        })
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        let entries = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::from_parts(self.layout.clone(), entries)
    }
}

/// Hermitian, unit-trace, positive semidefinite operator on a
/// [`SubsystemLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: SubsystemLayout,
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates every density-matrix invariant, including positivity.
    pub fn new(layout: SubsystemLayout, entries: CMatrix) -> Result<Self> {
        check_dim(&layout, entries.nrows())?;
        if !entries.is_square() {
            return Err(Error::Layout("density matrix must be square".into()));
        }
        let rho = Self { layout, entries };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts(layout: SubsystemLayout, entries: CMatrix) -> Self {
        debug_assert_eq!(layout.total_dim(), entries.nrows());
        Self { layout, entries }
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let dim = layout.total_dim();
        let entries = CMatrix::identity(dim, dim).unscale(dim as f64);
        Self { layout, entries }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.entries)
    }

    /// Smallest eigenvalue (computed on the numerical range for large
    /// matrices).
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::compressed_spectrum(&self.entries)
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::compressed_spectrum(&self.entries)
    }

    /// Trace and Hermiticity checks only; `O(dim^2)`.
    pub fn check_trace_and_hermiticity(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOLERANCE {
            return Err(Error::NonPhysicalState(format!(
                "hermiticity error {herm:e}"
            )));
        }
        let trace = self.trace();
        if (trace - linalg::ONE).norm() > TRACE_TOLERANCE {
            return Err(Error::NonPhysicalState(format!("trace {trace}")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_trace_and_hermiticity()?;
        let lowest = self.min_eigenvalue();
        if lowest < -POSITIVITY_TOLERANCE {
            return Err(Error::NonPhysicalState(format!(
                "negative eigenvalue {lowest:e}"
            )));
        }
        Ok(())
    }

    /// `Tr(rho A)`.
    pub fn expectation(&self, operator: &CMatrix) -> C64 {
        (operator * &self.entries).trace()
    }

    pub(crate) fn map_entries(&self, entries: CMatrix) -> Self {
        Self::from_parts(self.layout.clone(), entries)
    }
}

fn check_dim(layout: &SubsystemLayout, dim: usize) -> Result<()> {
    if layout.total_dim() != dim {
        return Err(Error::Layout(format!(
            "layout dimension {} does not match data dimension {dim}",
            layout.total_dim()
        )));
    }
    Ok(())
}
