//! Deterministic generators for named state families.
//!
//! Random families draw from `ChaCha20Rng::seed_from_u64(seed)`. Batches use
//! per-item seeds `root_seed + index` (wrapping), so item `k` of a batch is
//! reproducible on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::linalg::{self, c, CMatrix, CVector, TOL};

/// Generator specification recorded in reports.
pub const RNG_SPEC: &str = "ChaCha20Rng::seed_from_u64(root_seed + index), wrapping u64 addition";

pub fn rng_for(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn item_seed(root_seed: u64, index: usize) -> u64 {
    root_seed.wrapping_add(index as u64)
}

fn gaussian(rng: &mut impl Rng) -> num_complex::Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G^dagger / tr(G G^dagger)` for a `dim x rank` complex Gaussian `G`.
pub fn ginibre(dim: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(dim, rank, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m.unscale(tr)
}

pub fn random_vector(dim: usize, rng: &mut impl Rng) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal moved into Q.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellState {
    #[default]
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    /// Bell basis order used by Bell-diagonal parameters.
    pub const ALL: [BellState; 4] = [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus];

    pub fn vector(self) -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b, sign) = match self {
            BellState::PhiPlus => (0, 3, 1.0),
            BellState::PhiMinus => (0, 3, -1.0),
            BellState::PsiPlus => (1, 2, 1.0),
            BellState::PsiMinus => (1, 2, -1.0),
        };
        let mut v = CVector::zeros(4);
        v[a] = c(s, 0.0);
        v[b] = c(sign * s, 0.0);
        v
    }
}

fn default_two_qubits() -> Vec<usize> {
    vec![2, 2]
}

/// A state family and its parameters, e.g. `{"family":"werner","params":{"p":0.5}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    Bell {
        #[serde(default)]
        which: BellState,
    },
    BellDiagonal {
        probs: [f64; 4],
    },
    Werner {
        p: f64,
    },
    Product {
        a: MatrixJson,
        b: MatrixJson,
    },
    /// `sum_i q_i rho_{A|i} (x) |b_i><b_i|` with `b_i` the columns of
    /// `basis` (computational basis when absent).
    ClassicalQuantum {
        weights: Vec<f64>,
        conditionals: Vec<MatrixJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basis: Option<MatrixJson>,
    },
    RandomGinibre {
        #[serde(default = "default_two_qubits")]
        dims: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank: Option<usize>,
    },
    RandomPure {
        #[serde(default = "default_two_qubits")]
        dims: Vec<usize>,
    },
    Custom(MatrixJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl StateSpec {
    pub fn new(family: Family) -> Self {
        Self { family, seed: None }
    }

    pub fn seeded(family: Family, seed: u64) -> Self {
        Self { family, seed: Some(seed) }
    }

    pub fn is_random(&self) -> bool {
        matches!(self.family, Family::RandomGinibre { .. } | Family::RandomPure { .. })
    }
}

fn check_probability_vector(name: &str, probs: &[f64]) -> Result<()> {
    if probs.iter().any(|&p| p.is_nan() || p < -TOL) {
        return Err(Error::InvalidParams(format!("{name}: entries must be nonnegative, got {probs:?}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > TOL {
        return Err(Error::InvalidParams(format!("{name}: entries must sum to 1, got {total}")));
    }
    Ok(())
}

pub fn bell(which: BellState) -> DensityMatrix {
    DensityMatrix::from_raw(linalg::projector(&which.vector()), vec![2, 2])
}

pub fn bell_diagonal(probs: [f64; 4]) -> Result<DensityMatrix> {
    check_probability_vector("bell_diagonal probs", &probs)?;
    let m = BellState::ALL
        .iter()
        .zip(probs)
        .fold(CMatrix::zeros(4, 4), |acc, (b, p)| acc + linalg::projector(&b.vector()).scale(p));
    DensityMatrix::new(m, vec![2, 2])
}

/// `p |Phi+><Phi+| + (1 - p) I/4`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("werner p must lie in [0, 1], got {p}")));
    }
    let m = linalg::projector(&BellState::PhiPlus.vector()).scale(p) + CMatrix::identity(4, 4).scale((1.0 - p) / 4.0);
    DensityMatrix::new(m, vec![2, 2])
}

pub fn classical_quantum(weights: &[f64], conditionals: &[DensityMatrix], basis: &CMatrix) -> Result<DensityMatrix> {
    check_probability_vector("classical_quantum weights", weights)?;
    if weights.len() != conditionals.len() {
        return Err(Error::InvalidParams("one conditional state per weight is required".into()));
    }
    let d_b = basis.nrows();
    if weights.len() > d_b || basis.ncols() != d_b {
        return Err(Error::InvalidParams(format!("need a square basis with at least {} columns", weights.len())));
    }
    let residual = linalg::unitarity_residual(basis);
    if residual > TOL {
        return Err(Error::InvalidParams(format!("classical_quantum basis is not orthonormal (residual {residual:e})")));
    }
    let d_a = conditionals.first().map(DensityMatrix::dim).unwrap_or(1);
    if conditionals.iter().any(|r| r.dim() != d_a) {
        return Err(Error::InvalidParams("conditional states differ in dimension".into()));
    }
    let m = weights.iter().zip(conditionals).enumerate().fold(CMatrix::zeros(d_a * d_b, d_a * d_b), |acc, (i, (&q, rho))| {
        acc + rho.data().kronecker(&linalg::projector(&basis.column(i).into_owned())).scale(q)
    });
    DensityMatrix::new(m, vec![d_a, d_b])
}

/// Builds the state described by `spec`; random families use `spec.seed`
/// (0 when absent).
pub fn make(spec: &StateSpec) -> Result<DensityMatrix> {
    let seed = spec.seed.unwrap_or(0);
    match &spec.family {
        Family::Bell { which } => Ok(bell(*which)),
        Family::BellDiagonal { probs } => bell_diagonal(*probs),
        Family::Werner { p } => werner(*p),
        Family::Product { a, b } => Ok(a.to_density()?.tensor(&b.to_density()?)),
        Family::ClassicalQuantum { weights, conditionals, basis } => {
            let conditionals = conditionals.iter().map(MatrixJson::to_density).collect::<Result<Vec<_>>>()?;
            let basis = match basis {
                Some(b) => b.to_matrix()?,
                None => CMatrix::identity(weights.len().max(1), weights.len().max(1)),
            };
            classical_quantum(weights, &conditionals, &basis)
        }
        Family::RandomGinibre { dims, rank } => {
            let d: usize = dims.iter().product();
            let rank = rank.unwrap_or(d);
            if dims.is_empty() || d == 0 || rank == 0 || rank > d {
                return Err(Error::InvalidParams(format!("random_ginibre needs dims > 0 and 1 <= rank <= {d}")));
            }
            DensityMatrix::new(ginibre(d, rank, &mut rng_for(seed)), dims.clone())
        }
        Family::RandomPure { dims } => Ok(random_pure(dims, seed)?.density()),
        Family::Custom(m) => m.to_density(),
    }
}

pub fn random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    let d: usize = dims.iter().product();
    if dims.is_empty() || d == 0 {
        return Err(Error::InvalidParams("random_pure needs positive dims".into()));
    }
    PureState::new(random_vector(d, &mut rng_for(seed)), dims.to_vec())
}

/// `n` states of a random family with per-item seeds `root_seed + index`.
pub fn sample_batch(spec: &StateSpec, n: usize, root_seed: u64) -> Result<Vec<DensityMatrix>> {
    if !spec.is_random() {
        return Err(Error::InvalidParams("sample_batch requires a random family".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParams("sample_batch requires n >= 1".into()));
    }
    (0..n)
        .into_par_iter()
        .map(|i| make(&StateSpec { family: spec.family.clone(), seed: Some(item_seed(root_seed, i)) }))
        .collect()
}

/// Random classical-quantum two-party state: random weights, Ginibre
/// conditionals on A and a Haar-random orthonormal basis on B. Returns the
/// state and the basis.
pub fn random_classical_quantum(d_a: usize, d_b: usize, seed: u64) -> (DensityMatrix, CMatrix) {
    let mut rng = rng_for(seed);
    let raw: Vec<f64> = (0..d_b).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let conditionals: Vec<DensityMatrix> = (0..d_b)
        .map(|_| {
            let rank = rng.random_range(1..=d_a);
            DensityMatrix::from_raw(ginibre(d_a, rank, &mut rng), vec![d_a])
        })
        .collect();
    let basis = random_unitary(d_b, &mut rng);
    let state = classical_quantum(&weights, &conditionals, &basis).expect("valid by construction");
    (state, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::distance;

    #[test]
    fn werner_endpoints() {
        assert!(distance(werner(1.0).unwrap().data(), bell(BellState::PhiPlus).data()) < 1e-15);
        assert!(distance(werner(0.0).unwrap().data(), &CMatrix::identity(4, 4).scale(0.25)) < 1e-15);
        assert!(matches!(werner(1.5), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn werner_spectrum() {
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let ev = werner(p).unwrap().eigenvalues();
            let low = (1.0 - p) / 4.0;
            for v in &ev[..3] {
                assert!((v - low).abs() < 1e-12);
            }
            assert!((ev[3] - (1.0 + 3.0 * p) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_bell_mixture_is_maximally_mixed() {
        let rho = bell_diagonal([0.25; 4]).unwrap();
        assert!(distance(rho.data(), &CMatrix::identity(4, 4).scale(0.25)) < 1e-15);
        assert!(bell_diagonal([0.5, 0.5, 0.5, -0.5]).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec: StateSpec = serde_json::from_str(r#"{"family":"werner","params":{"p":0.5}}"#).unwrap();
        assert_eq!(spec.family, Family::Werner { p: 0.5 });
        let back = serde_json::to_string(&spec).unwrap();
        assert_eq!(back, r#"{"family":"werner","params":{"p":0.5}}"#);
        let random: StateSpec = serde_json::from_str(r#"{"family":"random_ginibre","params":{"dims":[2,2],"rank":2},"seed":7}"#).unwrap();
        assert_eq!(random.seed, Some(7));
        assert_eq!(make(&random).unwrap().rank(), 2);
    }

    #[test]
    fn ginibre_rank_respected() {
        for rank in 1..=4 {
            let rho = make(&StateSpec::seeded(Family::RandomGinibre { dims: vec![2, 2], rank: Some(rank) }, 3)).unwrap();
            assert_eq!(rho.rank(), rank);
        }
    }

    #[test]
    fn batch_determinism() {
        let spec = StateSpec::new(Family::RandomGinibre { dims: vec![2, 2], rank: None });
        let one = sample_batch(&spec, 1, 99).unwrap();
        assert_eq!(one[0], make(&StateSpec { seed: Some(99), ..spec.clone() }).unwrap());
        assert_eq!(sample_batch(&spec, 5, 4).unwrap(), sample_batch(&spec, 5, 4).unwrap());
        assert!(sample_batch(&StateSpec::new(Family::Werner { p: 0.3 }), 2, 0).is_err());
        assert!(sample_batch(&spec, 0, 0).is_err());
    }

    #[test]
    fn thousand_ginibre_states_are_valid() {
        let spec = StateSpec::new(Family::RandomGinibre { dims: vec![2, 2], rank: None });
        for rho in sample_batch(&spec, 1000, 2024).unwrap() {
            assert!(DensityMatrix::new(rho.data().clone(), vec![2, 2]).is_ok());
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(4, &mut rng_for(1));
        assert!(linalg::unitarity_residual(&u) < 1e-12);
    }

    #[test]
    fn classical_quantum_rejects_bad_basis() {
        let rho = DensityMatrix::maximally_mixed(vec![2]);
        let bad = CMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(classical_quantum(&[0.5, 0.5], &[rho.clone(), rho], &bad).is_err());
    }
}
