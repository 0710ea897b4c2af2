use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

use super::layout::SubsystemLayout;
use super::state::{DensityMatrix, PureState};

/// Kronecker composition, with the left operand as the slower index.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for CMatrix {
    fn tensor(&self, other: &Self) -> Self {
        self.kronecker(other)
    }
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        let amplitudes: CVector = self.amplitudes().kronecker(other.amplitudes());
        PureState::new(self.layout().concat(other.layout()), amplitudes)
            .expect("product of normalized states is normalized")
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        DensityMatrix::from_parts(
            self.layout().concat(other.layout()),
            self.entries().kronecker(other.entries()),
        )
    }
}

/// Left-to-right Kronecker product of `factors`. Panics on an empty list.
pub fn tensor_product<T: Tensor + Clone>(factors: &[T]) -> T {
    let (first, rest) = factors.split_first().expect("at least one factor");
    rest.iter().fold(first.clone(), |acc, f| acc.tensor(f))
}

/// Reduced state on the subsystems in `keep` (given as layout positions).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let layout = rho.layout();
    if keep.is_empty() || keep.iter().any(|&k| k >= layout.len()) {
        return Err(Error::Layout(format!(
            "cannot keep {keep:?} of a {}-party layout",
            layout.len()
        )));
    }
    let reduced_layout = layout.restrict(keep);
    let kept: Vec<bool> = (0..layout.len()).map(|i| keep.contains(&i)).collect();
    let dims = layout.dims();
    let dim = layout.total_dim();
    let kept_dim = reduced_layout.total_dim();
    let traced_dim = dim / kept_dim;

    // split every flat index into (kept index, traced index)
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_dim); traced_dim];
    for flat in 0..dim {
        let mut rem = flat;
        let (mut k, mut t) = (0usize, 0usize);
        let (mut kscale, mut tscale) = (1usize, 1usize);
        for (axis, &d) in dims.iter().enumerate().rev() {
            let digit = rem % d;
            rem /= d;
            if kept[axis] {
                k += digit * kscale;
                kscale *= d;
            } else {
                t += digit * tscale;
                tscale *= d;
            }
        }
        groups[t].push((flat, k));
    }

    let entries = rho.entries();
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &(c, kc) in group {
            for &(r, kr) in group {
                out[(kr, kc)] += entries[(r, c)];
            }
        }
    }
    Ok(DensityMatrix::from_parts(reduced_layout, out))
}

/// Trace distance `||rho - sigma||_1 / 2`. Panics if the layouts differ.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    assert_eq!(
        rho.layout().dims(),
        sigma.layout().dims(),
        "trace distance needs identical layouts"
    );
    let diff = rho.entries() - sigma.entries();
    0.5 * linalg::trace_norm_hermitian(&diff)
}

/// Photon-number probabilities of the subsystem at layout position `field`.
pub fn photon_number_distribution(rho: &DensityMatrix, field: usize) -> Result<Vec<f64>> {
    let reduced = partial_trace(rho, &[field])?;
    Ok(reduced.entries().diagonal().iter().map(|z| z.re.max(0.0)).collect())
}

pub fn mean_photon_number(rho: &DensityMatrix, field: usize) -> Result<f64> {
    let probs = photon_number_distribution(rho, field)?;
    Ok(probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum())
}

/// Diagonal of `rho` in the photon basis of subsystem `field`, computed
/// without forming the reduced matrix.
pub(crate) fn mean_photon_number_fast(rho: &DensityMatrix, field: usize) -> f64 {
    let layout = rho.layout();
    let d = layout.dims()[field];
    let stride = layout.stride(field);
    let entries = rho.entries();
    (0..rho.dim())
        .map(|i| ((i / stride) % d) as f64 * entries[(i, i)].re)
        .sum()
}

/// `|psi><psi|` for a single vector on a given layout, unchecked.
pub(crate) fn projector(layout: SubsystemLayout, v: &CVector) -> DensityMatrix {
    DensityMatrix::from_parts(layout, v * v.adjoint())
}
