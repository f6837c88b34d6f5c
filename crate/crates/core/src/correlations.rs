//! Total correlations, measured classical correlation and quantum discord
//! with measurements on the second subsystem.

use serde::Serialize;

use crate::density::{Bits, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, c, eigh, CMatrix};
use crate::measurement::{bipartite_dims, conditional_entropy_measured, measure_b, Measurement};
use crate::merging;
use crate::optimize::{maximize_povm, maximize_projective, OptimizerConfig, SearchOutcome, TracePoint};

/// `I(A:B) = S(A) + S(B) - S(A,B)`.
pub fn mutual_information(state: &DensityMatrix) -> Result<Bits> {
    bipartite_dims(state)?;
    Ok(state.entropy_of(&[0])? + state.entropy_of(&[1])? - state.entropy())
}

/// `S(A) - sum_i p_i S(rho_{A|i})` for one measurement on B.
pub fn measured_classical_correlation(state: &DensityMatrix, m: &Measurement) -> Result<Bits> {
    let s_a = state.entropy_of(&[0])?;
    Ok(s_a - conditional_entropy_measured(&measure_b(state, m)?))
}

fn check_measured_dim(state: &DensityMatrix) -> Result<usize> {
    let (_, d_b) = bipartite_dims(state)?;
    Ok(d_b)
}

/// Classical correlation `J` together with how it was found.
#[derive(Debug, Clone)]
pub struct ClassicalCorrelation {
    pub value: Bits,
    pub measurement: Measurement,
    /// False when the winning descent ran out of iterations before its
    /// objective spread fell below `tol_obj`.
    pub converged: bool,
    /// Best value over rank-1 POVMs, when that search was requested.
    pub povm_value: Option<Bits>,
    pub trace: Vec<TracePoint>,
}

/// `J = max over measurements on B of S(A) - sum_i p_i S(rho_{A|i})`.
/// The search covers rank-1 projective measurements; with `cfg.povm` set a
/// rank-1 POVM search is run as well and reported separately.
pub fn classical_correlation(state: &DensityMatrix, cfg: &OptimizerConfig) -> Result<ClassicalCorrelation> {
    cfg.validate()?;
    let d_b = check_measured_dim(state)?;
    let s_a = state.entropy_of(&[0])?.get();
    let objective = |m: &Measurement| {
        let e = measure_b(state, m).expect("dimensions checked");
        s_a - conditional_entropy_measured(&e).get()
    };
    let SearchOutcome { measurement, value, converged, trace } = maximize_projective(d_b, cfg, &objective);
    let povm_value = cfg.povm.then(|| Bits(maximize_povm(d_b, cfg, &objective).value));
    Ok(ClassicalCorrelation { value: Bits(value), measurement, converged, povm_value, trace })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscordResult {
    pub dims: Vec<usize>,
    pub mutual_info: Bits,
    pub classical_corr: Bits,
    pub discord: Bits,
    pub best_measurement: Measurement,
    /// `|D - (S(A'|B') - S(A|B))|` with the markup taken from the ancilla
    /// simulation of the best measurement.
    pub markup_check: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub povm_classical_corr: Option<Bits>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub optimizer_trace: Vec<TracePoint>,
}

impl DiscordResult {
    pub fn without_trace(mut self) -> Self {
        self.optimizer_trace.clear();
        self
    }
}

/// Discord `D(A|B) = I(A:B) - J(A|B)`.
pub fn discord(state: &DensityMatrix, cfg: &OptimizerConfig) -> Result<DiscordResult> {
    let mutual_info = mutual_information(state)?;
    let j = classical_correlation(state, cfg)?;
    let discord = mutual_info - j.value;
    let ledger = merging::merge_markup(state, &j.measurement)?;
    Ok(DiscordResult {
        dims: state.dims().to_vec(),
        mutual_info,
        classical_corr: j.value,
        discord,
        markup_check: (discord - ledger.markup).abs().get(),
        best_measurement: j.measurement,
        converged: j.converged,
        povm_classical_corr: j.povm_value,
        optimizer_trace: j.trace,
    })
}

/// Discord as the smallest increase of the merging cost, minimized over
/// measurements, with each cost read off the ancilla simulation.
pub fn discord_via_markup(state: &DensityMatrix, cfg: &OptimizerConfig) -> Result<Bits> {
    Ok(merging::minimize_markup(state, cfg)?.markup)
}

/// Outcome of the structural zero-discord test.
#[derive(Debug, Clone)]
pub struct ZeroDiscordTest {
    pub zero_discord: bool,
    /// Orthonormal basis of B (columns) in which the state is
    /// block diagonal, when `zero_discord` holds.
    pub witness: Option<CMatrix>,
    /// Largest off-diagonal B-block entry in the best basis found.
    pub residual: f64,
}

/// Structural test: the state has zero discord (measured on B) exactly when
/// it is block diagonal, `sum_i p_i rho_{A|i} (x) |b_i><b_i|`, in an
/// eigenbasis of `rho_B`. Degenerate eigenspaces of `rho_B` are resolved by
/// jointly diagonalizing the restricted blocks.
pub fn is_zero_discord(state: &DensityMatrix, tol: f64) -> Result<ZeroDiscordTest> {
    let (d_a, d_b) = bipartite_dims(state)?;
    let rho_b = state.partial_trace(&[1])?;
    let (vals, vecs) = eigh(rho_b.data());

    // Cluster eigenvalues into (near-)degenerate groups.
    let gap = tol.max(1e-10);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..d_b {
        match clusters.last_mut() {
            Some(cl) if vals[k] - vals[*cl.last().expect("non-empty")] <= gap => cl.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    let degenerate = clusters.iter().any(|cl| cl.len() > 1);

    let mut basis = vecs;
    if degenerate {
        let rotated = rotate_b(state.data(), &basis, d_a, d_b);
        for cl in clusters.iter().filter(|cl| cl.len() > 1) {
            let w = joint_diagonalizer(&rotated, cl, d_a, d_b);
            let cols: Vec<_> = cl.iter().map(|&k| basis.column(k).into_owned()).collect();
            for (local, &k) in cl.iter().enumerate() {
                let mut v = cols[0].scale(0.0);
                for (src, col) in cols.iter().enumerate() {
                    v += col * w[(src, local)];
                }
                basis.set_column(k, &v);
            }
        }
    }

    let residual = off_diagonal_blocks(&rotate_b(state.data(), &basis, d_a, d_b), d_a, d_b);
    if residual <= tol {
        return Ok(ZeroDiscordTest { zero_discord: true, witness: Some(basis), residual });
    }
    if degenerate && residual < 10.0 * tol {
        return Err(Error::DegenerateUndecided { residual, tol });
    }
    Ok(ZeroDiscordTest { zero_discord: false, witness: None, residual })
}

/// `(I (x) V)^dagger rho (I (x) V)`.
fn rotate_b(rho: &CMatrix, v: &CMatrix, d_a: usize, _d_b: usize) -> CMatrix {
    let lifted = CMatrix::identity(d_a, d_a).kronecker(v);
    lifted.adjoint() * rho * lifted
}

fn off_diagonal_blocks(rho: &CMatrix, d_a: usize, d_b: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..d_a {
        for a2 in 0..d_a {
            for j in 0..d_b {
                for k in 0..d_b {
                    if j != k {
                        worst = worst.max(rho[(a * d_b + j, a2 * d_b + k)].norm());
                    }
                }
            }
        }
    }
    worst
}

/// Unitary on the span of `cluster` that diagonalizes a generic Hermitian
/// combination of the restricted blocks `Y^{a a'}_{jk} = <a j| rho |a' k>`.
/// If the blocks commute, the same rotation diagonalizes all of them.
fn joint_diagonalizer(rotated: &CMatrix, cluster: &[usize], d_a: usize, d_b: usize) -> CMatrix {
    let m = cluster.len();
    let mut combo = CMatrix::zeros(m, m);
    let mut weight_index = 1.0;
    for a in 0..d_a {
        for a2 in 0..d_a {
            let y = CMatrix::from_fn(m, m, |j, k| rotated[(a * d_b + cluster[j], a2 * d_b + cluster[k])]);
            // Fixed incommensurate weights keep the combination generic.
            let w_re = (weight_index * std::f64::consts::SQRT_2).fract() + 0.5;
            let w_im = (weight_index * 3f64.sqrt()).fract() + 0.5;
            let herm = linalg::hermitize(&y);
            let anti = (&y - y.adjoint()) * c(0.0, -0.5);
            combo += herm.scale(w_re) + anti.scale(w_im);
            weight_index += 1.0;
        }
    }
    eigh(&combo).1
}
