//! Dense complex linear algebra used by the state and entanglement code.
//!
//! Large density matrices in this crate are numerically low rank (every
//! field is supported on the span of a few coherent branches), so spectral
//! quantities of big Hermitian matrices are computed on a compressed range
//! basis instead of a full eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Below this dimension spectra are computed directly.
const DIRECT_DIM: usize = 96;

/// Absolute trace-norm error budget of the compressed path.
const COMPRESSION_TRACE_ERROR: f64 = 1e-11;

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Entries smaller than this fraction of the largest one are flushed to zero
/// before an eigendecomposition; Householder reflections of columns made of
/// such entries underflow to `0/0`.
const FLUSH_BELOW: f64 = 1e-40;

/// Hermitian part of `m` with negligible entries set to zero.
fn eigen_input(m: &CMatrix) -> CMatrix {
    let mut h = hermitian_part(m);
    let cutoff = FLUSH_BELOW * max_abs(&h);
    for z in h.iter_mut() {
        if z.norm() < cutoff {
            *z = ZERO;
        }
    }
    h
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    if m.nrows() == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(eigen_input(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = SymmetricEigen::new(eigen_input(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Orthonormal basis (as columns) for the column space of `m`, found by
/// column-pivoted Gram-Schmidt. Stops once the Frobenius norm of the part of
/// `m` outside the basis drops below `residual`.
pub fn range_basis(m: &CMatrix, residual: f64) -> CMatrix {
    let (rows, cols) = m.shape();
    let mut rest = m.clone();
    let mut norms: Vec<f64> = (0..cols).map(|c| rest.column(c).norm_squared()).collect();
    let mut basis: Vec<CVector> = Vec::new();
    let target = residual * residual;

    while basis.len() < rows {
        let total: f64 = norms.iter().sum();
        if total <= target {
            break;
        }
        let (pivot, _) = norms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty matrix");
        let mut q: CVector = rest.column(pivot).into_owned();
        // two passes of reorthogonalization against the accepted basis
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&q);
                q.axpy(-overlap, b, ONE);
            }
        }
        let norm = q.norm();
        if norm == 0.0 {
            norms[pivot] = 0.0;
            continue;
        }
        q.unscale_mut(norm);
        // rest <- (I - q q^dagger) rest
        let projection: CVector = rest.tr_mul(&q.conjugate());
        rest.ger(-ONE, &q, &projection, ONE);
        for (c, n) in norms.iter_mut().enumerate() {
            *n = rest.column(c).norm_squared();
        }
        norms[pivot] = 0.0;
        basis.push(q);
    }

    if basis.is_empty() {
        return CMatrix::zeros(rows, 0);
    }
    CMatrix::from_columns(&basis)
}

/// Spectrum of a Hermitian matrix restricted to its numerical range, padded
/// with zeros for the complement.
///
/// The returned eigenvalues are accurate to about
/// `COMPRESSION_TRACE_ERROR` in trace norm.
pub fn compressed_spectrum(m: &CMatrix) -> Vec<f64> {
    let dim = m.nrows();
    if dim <= DIRECT_DIM {
        return eigvalsh(m);
    }
    let residual = COMPRESSION_TRACE_ERROR / (2.0 * (dim as f64).sqrt());
    let q = range_basis(m, residual);
    if q.ncols() == 0 {
        return vec![0.0; dim];
    }
    if q.ncols() * 2 > dim {
        return eigvalsh(m);
    }
    let reduced = q.adjoint() * m * &q;
    let mut values = eigvalsh(&reduced);
    values.resize(dim, 0.0);
    values.sort_by(f64::total_cmp);
    values
}

pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    compressed_spectrum(m).iter().map(|v| v.abs()).sum()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for c in 0..n {
        for r in c..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Principal square root of a positive semidefinite matrix (negative
/// eigenvalues clipped).
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh(m);
    let roots = values.iter().map(|v| C64::from(v.max(0.0).sqrt()));
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(values.len(), roots));
    &vectors * diag * vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_low_rank(dim: usize, rank: usize, seed: u64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v = CMatrix::from_fn(dim, rank, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let signs = CMatrix::from_fn(rank, rank, |r, c| {
            if r == c {
                C64::from(if r % 2 == 0 { 1.0 } else { -0.5 })
            } else {
                ZERO
            }
        });
        &v * signs * v.adjoint()
    }

    #[test]
    fn eigh_of_mixture_with_underflowing_tail_is_finite() {
        // two weak coherent branches on 35 Fock levels; the high-photon
        // entries of the outer products reach the subnormal range
        let a = crate::hilbert::coherent_coefficients(C64::new(0.0155, 0.002), 34);
        let b = crate::hilbert::coherent_coefficients(C64::new(-0.012, 0.009), 34);
        let m = (&a * a.adjoint()).scale(0.5) + (&b * b.adjoint()).scale(0.5);
        let (values, vectors) = eigh(&m);
        assert!(values.iter().all(|v| v.is_finite()));
        assert!(vectors.iter().all(|z| z.is_finite()));
        assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compressed_spectrum_matches_direct() {
        let m = random_low_rank(150, 7, 3);
        let direct = eigvalsh(&m);
        let compressed = compressed_spectrum(&m);
        for (a, b) in direct.iter().zip(&compressed) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn range_basis_is_orthonormal() {
        let m = random_low_rank(120, 5, 11);
        let q = range_basis(&m, 1e-12);
        assert_eq!(q.ncols(), 5);
        let gram = q.adjoint() * &q;
        assert!((gram - CMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = random_low_rank(6, 3, 5);
        let psd = &m * m.adjoint();
        let root = psd_sqrt(&psd);
        assert!((&root * &root - &psd).norm() < 1e-9);
    }
}
