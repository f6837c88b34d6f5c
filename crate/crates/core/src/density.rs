//! Validated density matrices and pure states over ordered tensor-product
//! factors, plus the basic operations on them: composition, reduction,
//! purification, unitary evolution and von Neumann entropy.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, compose, digits, eigh, eigvalsh, hermitian_residual, max_abs, split_indices, trace, CMatrix, CVector, EIG_FLOOR, TOL, ZERO,
};

/// An entropy-like quantity in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(pub f64);

impl Bits {
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn abs(self) -> Bits {
        Bits(self.0.abs())
    }
}

impl Add for Bits {
    type Output = Bits;
    fn add(self, rhs: Bits) -> Bits {
        Bits(self.0 + rhs.0)
    }
}

impl Sub for Bits {
    type Output = Bits;
    fn sub(self, rhs: Bits) -> Bits {
        Bits(self.0 - rhs.0)
    }
}

impl Neg for Bits {
    type Output = Bits;
    fn neg(self) -> Bits {
        Bits(-self.0)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

fn check_dims(n: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("subsystem dimensions {dims:?} must be non-empty and positive")));
    }
    let product: usize = dims.iter().product();
    if product != n {
        return Err(Error::DimensionMismatch(format!("product of dims {dims:?} is {product}, matrix size is {n}")));
    }
    Ok(())
}

/// Hermitian, positive semidefinite, unit-trace matrix on a tensor product
/// of subsystems. Stored data is never modified after validation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
    dims: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl DensityMatrix {
    /// Validates `data` against every density-matrix invariant.
    pub fn new(data: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::DimensionMismatch(format!("matrix is {}x{}, not square", data.nrows(), data.ncols())));
        }
        check_dims(data.nrows(), &dims)?;
        let residual = hermitian_residual(&data);
        if residual > TOL {
            return Err(Error::NotHermitian { residual });
        }
        let tr = trace(&data);
        let residual = (tr - c(1.0, 0.0)).norm();
        if residual > TOL {
            return Err(Error::TraceNotOne { residual });
        }
        let min_eigenvalue = eigvalsh(&data)[0];
        if min_eigenvalue < -TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { data, dims, labels: None })
    }

    /// Builds a state whose invariants hold by construction. The matrix is
    /// hermitized so rounding never breaks symmetry downstream.
    pub(crate) fn from_raw(data: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(data.nrows(), dims.iter().product::<usize>());
        Self { data: linalg::hermitize(&data), dims, labels: None }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self::from_raw(CMatrix::identity(d, d).unscale(d as f64), dims)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::from_raw(linalg::projector(&psi.amplitudes), psi.dims.clone())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.dims.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Eigenvalues ascending, unclipped.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.data)
    }

    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).trace().re
    }

    /// Number of eigenvalues above the zero floor.
    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > EIG_FLOOR).count()
    }

    pub fn is_pure(&self) -> bool {
        self.purity() >= 1.0 - TOL
    }

    /// Kronecker product; subsystem lists are concatenated.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        DensityMatrix { data: self.data.kronecker(&other.data), dims, labels }
    }

    fn check_slots(&self, slots: &[usize]) -> Result<()> {
        for &index in slots {
            if index >= self.dims.len() {
                return Err(Error::BadSubsystemIndex { index, count: self.dims.len() });
            }
        }
        Ok(())
    }

    /// Reduced state on the `keep` subsystems, kept in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.check_slots(keep)?;
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(Error::DimensionMismatch("partial trace must keep at least one subsystem".into()));
        }
        let kept_dims: Vec<usize> = keep.iter().map(|&s| self.dims[s]).collect();
        let kd: usize = kept_dims.iter().product();
        let (inside, outside) = split_indices(&self.dims, &keep);
        let n = self.dim();
        let mut out = CMatrix::zeros(kd, kd);
        for r in 0..n {
            for col in 0..n {
                if outside[r] == outside[col] {
                    out[(inside[r], inside[col])] += self.data[(r, col)];
                }
            }
        }
        let labels = self.labels.as_ref().map(|l| keep.iter().map(|&s| l[s].clone()).collect());
        let mut reduced = DensityMatrix::from_raw(out, kept_dims);
        reduced.labels = labels;
        Ok(reduced)
    }

    /// Reorders the subsystems: slot `k` of the result is slot `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<DensityMatrix> {
        self.check_slots(order)?;
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.dims.len()).collect::<Vec<_>>() {
            return Err(Error::DimensionMismatch(format!("{order:?} is not a permutation of the subsystems")));
        }
        let (inside, _) = split_indices(&self.dims, order);
        let n = self.dim();
        let mut out = CMatrix::from_element(n, n, ZERO);
        for r in 0..n {
            for col in 0..n {
                out[(inside[r], inside[col])] = self.data[(r, col)];
            }
        }
        let dims = order.iter().map(|&s| self.dims[s]).collect();
        let labels = self.labels.as_ref().map(|l| order.iter().map(|&s| l[s].clone()).collect());
        Ok(DensityMatrix { data: out, dims, labels })
    }

    /// Partial transpose on one subsystem (Peres-Horodecki test input).
    pub fn partial_transpose(&self, slot: usize) -> Result<CMatrix> {
        self.check_slots(&[slot])?;
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for r in 0..n {
            for col in 0..n {
                let mut dr = digits(r, &self.dims);
                let mut dc = digits(col, &self.dims);
                std::mem::swap(&mut dr[slot], &mut dc[slot]);
                let at = |dg: Vec<usize>| compose(dg.into_iter().zip(self.dims.iter().copied()));
                out[(at(dr), at(dc))] = self.data[(r, col)];
            }
        }
        Ok(out)
    }

    /// Conjugation `U rho U^dagger` with `u` acting on the listed subsystems
    /// (in the listed order) and the identity elsewhere.
    pub fn apply_unitary(&self, u: &CMatrix, on: &[usize]) -> Result<DensityMatrix> {
        let full = embed_operator(&self.dims, u, on)?;
        let residual = linalg::unitarity_residual(u);
        if residual > TOL {
            return Err(Error::NotUnitary { residual });
        }
        let mut next = DensityMatrix::from_raw(&full * &self.data * full.adjoint(), self.dims.clone());
        next.labels = self.labels.clone();
        Ok(next)
    }

    /// Von Neumann entropy in bits. Eigenvalues are clipped to [0, 1] for
    /// the evaluation only; those at or below 1e-12 contribute nothing.
    pub fn entropy(&self) -> Bits {
        Bits(linalg::shannon_bits(self.eigenvalues()))
    }

    /// Entropy of the marginal on `keep`.
    pub fn entropy_of(&self, keep: &[usize]) -> Result<Bits> {
        if keep.len() == self.dims.len() {
            return Ok(self.entropy());
        }
        Ok(self.partial_trace(keep)?.entropy())
    }

    /// Purification with a reference system of dimension equal to the
    /// numerical rank, appended as the last subsystem.
    pub fn purify(&self) -> PureState {
        let (vals, vecs) = eigh(&self.data);
        let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > EIG_FLOOR).collect();
        let r = kept.len().max(1);
        let d = self.dim();
        let mut amps = CVector::zeros(d * r);
        for (slot, &k) in kept.iter().enumerate() {
            let weight = vals[k].sqrt();
            for i in 0..d {
                amps[i * r + slot] += vecs[(i, k)] * weight;
            }
        }
        let norm = amps.norm();
        let mut dims = self.dims.clone();
        dims.push(r);
        PureState { amplitudes: amps.unscale(norm), dims }
    }
}

/// Embeds `op` acting on `slots` (in the listed order) into the full space.
pub fn embed_operator(dims: &[usize], op: &CMatrix, slots: &[usize]) -> Result<CMatrix> {
    for &index in slots {
        if index >= dims.len() {
            return Err(Error::BadSubsystemIndex { index, count: dims.len() });
        }
    }
    let mut seen = slots.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != slots.len() || slots.is_empty() {
        return Err(Error::DimensionMismatch(format!("target subsystems {slots:?} must be distinct and non-empty")));
    }
    let target: usize = slots.iter().map(|&s| dims[s]).product();
    if !op.is_square() || op.nrows() != target {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but targeted subsystems have dimension {target}",
            op.nrows(),
            op.ncols()
        )));
    }
    let (inside, outside) = split_indices(dims, slots);
    let n: usize = dims.iter().product();
    let mut full = CMatrix::zeros(n, n);
    for r in 0..n {
        for col in 0..n {
            if outside[r] == outside[col] {
                full[(r, col)] = op[(inside[r], inside[col])];
            }
        }
    }
    Ok(full)
}

/// Normalized state vector over ordered subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let residual = (amplitudes.norm_squared() - 1.0).abs();
        if residual > TOL {
            return Err(Error::NotNormalized { residual });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { residual: 1.0 });
        }
        Ok(Self { amplitudes: amplitudes.unscale(norm), dims })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Maximum entrywise distance between two matrices of equal shape.
pub fn distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    max_abs(&(a - b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::states::{ginibre, random_unitary, rng_for};

    fn diag(entries: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(entries.len(), entries.iter().map(|&x| c(x, 0.0))))
    }

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(CVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]), vec![2, 2]).unwrap().density()
    }

    fn ket0() -> DensityMatrix {
        DensityMatrix::new(diag(&[1.0, 0.0]), vec![2]).unwrap()
    }

    #[test]
    fn validates_maximally_mixed_and_plus() {
        assert!(DensityMatrix::new(diag(&[0.5, 0.5]), vec![2]).is_ok());
        let plus = CMatrix::from_element(2, 2, c(0.5, 0.0));
        assert!(DensityMatrix::new(plus, vec![2]).is_ok());
    }

    #[test]
    fn trace_violation_is_named_with_residual() {
        let err = DensityMatrix::new(diag(&[1.0, 0.1]), vec![2]).unwrap_err();
        match err {
            Error::TraceNotOne { residual } => assert!((residual - 0.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_validation_errors() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, 0.0), c(0.1, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(m, vec![2]), Err(Error::NotHermitian { .. })));
        assert!(matches!(DensityMatrix::new(diag(&[1.5, -0.5]), vec![2]), Err(Error::NotPositive { .. })));
        assert!(matches!(DensityMatrix::new(diag(&[0.5, 0.5]), vec![3]), Err(Error::DimensionMismatch(_))));
        assert!(matches!(DensityMatrix::new(CMatrix::zeros(2, 3), vec![2]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn tensor_examples() {
        let mixed = DensityMatrix::maximally_mixed(vec![2]);
        let both = mixed.tensor(&mixed);
        assert_eq!(both.dims(), &[2, 2]);
        assert!(distance(both.data(), &diag(&[0.25; 4])) < 1e-15);
        let zz = ket0().tensor(&ket0());
        assert!(distance(zz.data(), &diag(&[1.0, 0.0, 0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn tensor_then_trace_roundtrip() {
        let rho = DensityMatrix::from_raw(ginibre(2, 2, &mut rng_for(3)), vec![2]);
        let back = rho.tensor(&ket0()).partial_trace(&[0]).unwrap();
        assert!(distance(back.data(), rho.data()) < 1e-15);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let a = bell().partial_trace(&[0]).unwrap();
        assert!(distance(a.data(), &diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn product_marginals() {
        let ra = DensityMatrix::from_raw(ginibre(2, 2, &mut rng_for(1)), vec![2]);
        let rb = DensityMatrix::from_raw(ginibre(3, 3, &mut rng_for(2)), vec![3]);
        let ab = ra.tensor(&rb);
        assert!(distance(ab.partial_trace(&[0]).unwrap().data(), ra.data()) < 1e-14);
        assert!(distance(ab.partial_trace(&[1]).unwrap().data(), rb.data()) < 1e-14);
    }

    #[test]
    fn partial_trace_composes() {
        let rho = DensityMatrix::from_raw(ginibre(8, 8, &mut rng_for(11)), vec![2, 2, 2]);
        let direct = rho.partial_trace(&[0]).unwrap();
        let staged = rho.partial_trace(&[0, 1]).unwrap().partial_trace(&[0]).unwrap();
        assert!(distance(direct.data(), staged.data()) <= 1e-12);
    }

    #[test]
    fn partial_trace_bad_index() {
        assert!(matches!(bell().partial_trace(&[2]), Err(Error::BadSubsystemIndex { index: 2, count: 2 })));
    }

    #[test]
    fn entropy_examples() {
        assert!((DensityMatrix::maximally_mixed(vec![2]).entropy().get() - 1.0).abs() < 1e-12);
        assert!(bell().entropy().get().abs() < 1e-12);
        assert!((DensityMatrix::maximally_mixed(vec![2, 2]).entropy().get() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn purify_examples() {
        let pure = bell().purify();
        assert_eq!(pure.dims(), &[2, 2, 1]);
        let mixed = DensityMatrix::maximally_mixed(vec![2]).purify();
        assert_eq!(mixed.dims(), &[2, 2]);
        let schmidt = mixed.density().partial_trace(&[0]).unwrap();
        assert!(distance(schmidt.data(), &diag(&[0.5, 0.5])) < 1e-12);
        assert!(mixed.amplitudes().iter().all(|a| a.norm() < 1e-12 || (a.norm() - 0.5f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn purify_rank_three() {
        let rho = DensityMatrix::from_raw(ginibre(4, 3, &mut rng_for(5)), vec![2, 2]);
        let psi = rho.purify();
        assert_eq!(psi.dims(), &[2, 2, 3]);
        let back = psi.density().partial_trace(&[0, 1]).unwrap();
        assert!(distance(back.data(), rho.data()) < 1e-9);
    }

    #[test]
    fn apply_unitary_examples() {
        let ra = DensityMatrix::from_raw(ginibre(2, 2, &mut rng_for(7)), vec![2]);
        let rb = DensityMatrix::from_raw(ginibre(2, 1, &mut rng_for(8)), vec![2]);
        let ab = ra.tensor(&rb);
        let same = ab.apply_unitary(&CMatrix::identity(4, 4), &[0, 1]).unwrap();
        assert!(distance(same.data(), ab.data()) < 1e-15);
        let mut swap = CMatrix::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, col)] = ONE;
        }
        let swapped = ab.apply_unitary(&swap, &[0, 1]).unwrap();
        assert!(distance(swapped.data(), rb.tensor(&ra).data()) < 1e-15);
        let u = random_unitary(4, &mut rng_for(9));
        let rotated = ab.apply_unitary(&u, &[1, 0]).unwrap();
        assert!((rotated.entropy().get() - ab.entropy().get()).abs() < 1e-9);
    }

    #[test]
    fn apply_unitary_errors() {
        let ab = bell();
        assert!(matches!(ab.apply_unitary(&diag(&[1.0, 2.0]), &[0]), Err(Error::NotUnitary { .. })));
        assert!(matches!(ab.apply_unitary(&CMatrix::identity(4, 4), &[0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn permute_swaps_product_factors() {
        let ra = DensityMatrix::from_raw(ginibre(2, 2, &mut rng_for(21)), vec![2]);
        let rb = DensityMatrix::from_raw(ginibre(3, 2, &mut rng_for(22)), vec![3]);
        let swapped = ra.tensor(&rb).permute(&[1, 0]).unwrap();
        assert_eq!(swapped.dims(), &[3, 2]);
        assert!(distance(swapped.data(), rb.tensor(&ra).data()) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_bell_has_negative_eigenvalue() {
        let pt = bell().partial_transpose(1).unwrap();
        assert!((eigvalsh(&pt)[0] + 0.5).abs() < 1e-12);
    }
}
