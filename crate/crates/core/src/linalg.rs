//! Small dense complex linear algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for Hermiticity, positivity, trace and unitarity checks.
pub const TOL: f64 = 1e-9;
/// Eigenvalues at or below this are treated as exact zeros.
pub const EIG_FLOOR: f64 = 1e-12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
#[cfg(test)]
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())))
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
/// Column `k` of the returned matrix is the eigenvector of eigenvalue `k`.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Principal square root of a positive semidefinite matrix; negative
/// eigenvalues from rounding are clipped to zero.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let roots = DVector::from_iterator(vals.len(), vals.iter().map(|&l| c(l.max(0.0).sqrt(), 0.0)));
    &vecs * CMatrix::from_diagonal(&roots) * vecs.adjoint()
}

/// Inverse square root of a positive definite matrix.
pub fn inv_sqrt_pd(m: &CMatrix) -> Option<CMatrix> {
    let (vals, vecs) = eigh(m);
    if vals.first().is_some_and(|&l| l <= EIG_FLOOR) {
        return None;
    }
    let roots = DVector::from_iterator(vals.len(), vals.iter().map(|&l| c(1.0 / l.sqrt(), 0.0)));
    Some(&vecs * CMatrix::from_diagonal(&roots) * vecs.adjoint())
}

/// Shannon entropy in bits of a list of weights, ignoring entries at or
/// below the eigenvalue floor.
pub fn shannon_bits<I: IntoIterator<Item = f64>>(weights: I) -> f64 {
    weights
        .into_iter()
        .map(|p| p.clamp(0.0, 1.0))
        .filter(|&p| p > EIG_FLOOR)
        .map(|p| -p * p.log2())
        .sum()
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Canonical little-endian byte serialization: row-major, real then imaginary part.
pub fn canonical_bytes(m: &CMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * m.len() + 16);
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            let z = m[(r, col)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

/// Mixed-radix digits of `index` for the given subsystem dimensions,
/// most significant subsystem first.
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in dims.iter().enumerate().rev() {
        out[slot] = index % d;
        index /= d;
    }
    out
}

pub(crate) fn compose(digits: impl IntoIterator<Item = (usize, usize)>) -> usize {
    digits.into_iter().fold(0, |acc, (digit, d)| acc * d + digit)
}

/// For every basis index of the full space, its index inside the subspace
/// spanned by `slots` (in the listed order) and inside the complement
/// (in original order).
pub(crate) fn split_indices(dims: &[usize], slots: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let total: usize = dims.iter().product();
    let rest: Vec<usize> = (0..dims.len()).filter(|s| !slots.contains(s)).collect();
    let mut inside = Vec::with_capacity(total);
    let mut outside = Vec::with_capacity(total);
    for i in 0..total {
        let dg = digits(i, dims);
        inside.push(compose(slots.iter().map(|&s| (dg[s], dims[s]))));
        outside.push(compose(rest.iter().map(|&s| (dg[s], dims[s]))));
    }
    (inside, outside)
}

/// Orthonormalize `candidate` against `basis` (two Gram-Schmidt passes).
/// Returns `None` when the remaining component is below `min_norm`.
pub(crate) fn orthonormalize(candidate: &CVector, basis: &[CVector], min_norm: f64) -> Option<CVector> {
    let mut v = candidate.clone();
    for _ in 0..2 {
        for b in basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
    }
    let norm = v.norm();
    (norm > min_norm).then(|| v.unscale(norm))
}
