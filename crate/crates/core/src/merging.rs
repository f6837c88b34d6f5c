//! Merging-cost accounting: the classical Slepian-Wolf rate, the quantum
//! merging cost `S(A|B)`, the coherent ancilla simulation of a measurement
//! on B, and the ledger of how much the cost rises once the ancilla is
//! discarded.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::correlations::mutual_information;
use crate::density::{Bits, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, c, canonical_bytes, CMatrix};
use crate::measurement::{bipartite_dims, MeasuredEnsemble, Measurement, MeasurementKind, NeumarkDilation};
use crate::optimize::{maximize_projective, OptimizerConfig};

/// Joint distribution `p(x, y)`: rows indexed by `x`, columns by `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    probs: Vec<Vec<f64>>,
}

impl JointPmf {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        let cols = probs.first().map_or(0, Vec::len);
        if probs.is_empty() || cols == 0 || probs.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidPmf("table must be a non-empty rectangle".into()));
        }
        if let Some(bad) = probs.iter().flatten().find(|&&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidPmf(format!("entry {bad} is negative or not finite")));
        }
        let total: f64 = probs.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.probs.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.probs[0].len()).map(|y| self.probs.iter().map(|r| r[y]).sum()).collect()
    }

    pub fn joint_entropy(&self) -> Bits {
        Bits(linalg::shannon_bits(self.probs.iter().flatten().copied()))
    }

    pub fn entropy_x(&self) -> Bits {
        Bits(linalg::shannon_bits(self.marginal_x()))
    }

    pub fn entropy_y(&self) -> Bits {
        Bits(linalg::shannon_bits(self.marginal_y()))
    }
}

/// Slepian-Wolf rate `H(X|Y) = H(X,Y) - H(Y)`.
pub fn classical_merge_cost(p: &JointPmf) -> Bits {
    p.joint_entropy() - p.entropy_y()
}

/// Quantum merging cost `S(A|B) = S(A,B) - S(B)`; negative values mean
/// `-S(A|B)` ebits can be distilled.
pub fn merge_cost(state: &DensityMatrix) -> Result<Bits> {
    bipartite_dims(state)?;
    Ok(state.entropy() - state.entropy_of(&[1])?)
}

pub fn ebits_distillable(cost: Bits) -> f64 {
    (-cost.get()).max(0.0)
}

/// `S(X|Y) = S(X,Y) - S(Y)` for subsystem groups of a multipartite state.
fn conditional_entropy(state: &DensityMatrix, x: &[usize], y: &[usize]) -> Result<Bits> {
    let mut xy: Vec<usize> = x.iter().chain(y).copied().collect();
    xy.sort_unstable();
    Ok(state.entropy_of(&xy)? - state.entropy_of(y)?)
}

fn mutual_info_groups(state: &DensityMatrix, x: &[usize], y: &[usize]) -> Result<Bits> {
    let mut xy: Vec<usize> = x.iter().chain(y).copied().collect();
    xy.sort_unstable();
    Ok(state.entropy_of(x)? + state.entropy_of(y)? - state.entropy_of(&xy)?)
}

/// Tripartite record of a measurement on B realized as a unitary on B and
/// an ancilla C prepared in `|0>`.
#[derive(Debug, Clone)]
pub struct AncillaSimulation {
    /// State on A (x) B (x) C right after the unitary.
    pub coherent: DensityMatrix,
    /// The same state with C dephased in its computational basis.
    pub dephased: DensityMatrix,
    /// Ensemble read from the dephased state: `p_i` and `rho_{A|i}` from
    /// the blocks of `tr_B` indexed by the ancilla outcome.
    pub ensemble: MeasuredEnsemble,
    pub dilation: NeumarkDilation,
    kind: MeasurementKind,
}

impl AncillaSimulation {
    /// Post-measurement state on A and the measured party once the
    /// discardable part is traced out. For projective measurements the
    /// ancilla C is discarded and B keeps the outcome in its measured basis;
    /// for general POVMs the outcome record lives in C, so the residual B is
    /// discarded instead. Either way the result is
    /// `sum_j p_j rho_{A|j} (x) pi_j` with orthogonal `pi_j`.
    pub fn post_measurement_state(&self) -> DensityMatrix {
        let keep = match self.kind {
            MeasurementKind::ProjectiveRank1 => [0, 1],
            MeasurementKind::Povm => [0, 2],
        };
        self.dephased.partial_trace(&keep).expect("three subsystems")
    }
}

/// Attaches `|0><0|` on C (dimension = outcome count), applies the Neumark
/// unitary on B (x) C, and dephases C.
pub fn simulate_measurement_via_ancilla(state: &DensityMatrix, m: &Measurement) -> Result<AncillaSimulation> {
    let (d_a, d_b) = bipartite_dims(state)?;
    if m.dim() != d_b {
        return Err(Error::DimensionMismatch(format!("measurement acts on dimension {}, B has {d_b}", m.dim())));
    }
    let dilation = m.neumark_extend()?;
    let n = dilation.ancilla_dim;
    let mut ket0 = CMatrix::zeros(n, n);
    ket0[(0, 0)] = c(1.0, 0.0);
    let ancilla = DensityMatrix::new(ket0, vec![n])?;
    let coherent = state.tensor(&ancilla).apply_unitary(&dilation.unitary, &[1, 2])?;

    let total = d_a * d_b * n;
    let data = coherent.data();
    let dephased = CMatrix::from_fn(total, total, |r, col| if r % n == col % n { data[(r, col)] } else { c(0.0, 0.0) });
    let dephased = DensityMatrix::from_raw(dephased, vec![d_a, d_b, n]);

    let on_ac = dephased.partial_trace(&[0, 2])?;
    let sigmas = (0..n)
        .map(|i| CMatrix::from_fn(d_a, d_a, |a, a2| on_ac.data()[(a * n + i, a2 * n + i)]))
        .collect();
    let ensemble = MeasuredEnsemble::from_unnormalized(sigmas, d_a);
    Ok(AncillaSimulation { coherent, dephased, ensemble, dilation, kind: m.kind() })
}

/// Intermediate quantities of the ancilla simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTranscript {
    pub ancilla_dim: usize,
    /// SHA-256 of the canonical byte serialization of the dilation unitary.
    pub unitary_sha256: String,
    /// `S(A'|B'C')` before C is discarded.
    pub cond_entropy_with_ancilla: Bits,
    /// `I(A':B'C')` before C is discarded.
    pub mutual_info_with_ancilla: Bits,
    /// `I(A':B')` after the measurement record is all that is kept.
    pub mutual_info_after: Bits,
    pub outcome_probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeLedger {
    /// `S(A|B)` before the measurement.
    pub cost_before: Bits,
    /// `S(A'|B')` of the post-measurement state.
    pub cost_after: Bits,
    pub markup: Bits,
    pub ebits_distillable_before: f64,
    pub transcript: SimulationTranscript,
}

/// Merging cost of the post-measurement state read off the ancilla simulation.
pub fn post_measurement_merge_cost(state: &DensityMatrix, m: &Measurement) -> Result<Bits> {
    let sim = simulate_measurement_via_ancilla(state, m)?;
    merge_cost(&sim.post_measurement_state())
}

/// Merging costs before and after measuring B, and the markup between them.
pub fn merge_markup(state: &DensityMatrix, m: &Measurement) -> Result<MergeLedger> {
    let cost_before = merge_cost(state)?;
    let sim = simulate_measurement_via_ancilla(state, m)?;
    let post = sim.post_measurement_state();
    let cost_after = merge_cost(&post)?;
    let transcript = SimulationTranscript {
        ancilla_dim: sim.dilation.ancilla_dim,
        unitary_sha256: hex::encode(Sha256::digest(canonical_bytes(&sim.dilation.unitary))),
        cond_entropy_with_ancilla: conditional_entropy(&sim.coherent, &[0], &[1, 2])?,
        mutual_info_with_ancilla: mutual_info_groups(&sim.coherent, &[0], &[1, 2])?,
        mutual_info_after: mutual_information(&post)?,
        outcome_probs: sim.ensemble.probs.clone(),
    };
    Ok(MergeLedger {
        cost_before,
        cost_after,
        markup: cost_after - cost_before,
        ebits_distillable_before: ebits_distillable(cost_before),
        transcript,
    })
}

#[derive(Debug, Clone)]
pub struct MarkupOptimum {
    pub markup: Bits,
    pub measurement: Measurement,
    pub converged: bool,
}

/// Smallest markup over rank-1 projective measurements on B.
pub fn minimize_markup(state: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MarkupOptimum> {
    cfg.validate()?;
    let (_, d_b) = bipartite_dims(state)?;
    let before = merge_cost(state)?.get();
    let objective = |m: &Measurement| {
        let after = post_measurement_merge_cost(state, m).map_or(f64::INFINITY, Bits::get);
        before - after
    };
    let out = maximize_projective(d_b, cfg, &objective);
    Ok(MarkupOptimum { markup: Bits(-out.value), measurement: out.measurement, converged: out.converged })
}

/// Strong-subadditivity slack `S(A|B) - S(A|B,C)`; never below -1e-8 for
/// a valid state.
pub fn check_ssa(tripartite: &DensityMatrix) -> Result<f64> {
    if tripartite.num_subsystems() != 3 {
        return Err(Error::DimensionMismatch(format!("expected three subsystems, got dims {:?}", tripartite.dims())));
    }
    Ok((conditional_entropy(tripartite, &[0], &[1])? - conditional_entropy(tripartite, &[0], &[1, 2])?).get())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{distance, PureState};
    use crate::linalg::CVector;
    use crate::measurement::measure_b;
    use crate::states::{bell, ginibre, random_classical_quantum, rng_for, BellState};

    fn h(p: &[f64]) -> f64 {
        p.iter().filter(|&&x| x > 0.0).map(|x| -x * x.log2()).sum()
    }

    #[test]
    fn slepian_wolf_examples() {
        let indep = JointPmf::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert!((classical_merge_cost(&indep).get() - 1.0).abs() < 1e-15);
        let copy = JointPmf::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!(classical_merge_cost(&copy).get().abs() < 1e-15);
    }

    #[test]
    fn slepian_wolf_matches_definition() {
        let table: Vec<Vec<f64>> = vec![vec![0.5, 0.25], vec![0.0, 0.25]];
        // H(X|Y) = sum p(x,y) log2(p(y) / p(x,y))
        let py = [0.5f64, 0.5];
        let mut oracle = 0.0f64;
        for (x, row) in table.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    oracle += p * (py[y] / table[x][y]).log2();
                }
            }
        }
        assert!((oracle - 0.5).abs() < 1e-15);
        let direct = classical_merge_cost(&JointPmf::new(table).unwrap()).get();
        assert!((direct - oracle).abs() < 1e-12);
        assert!((direct - (h(&[0.5, 0.25, 0.25]) - h(&py))).abs() < 1e-12);
    }

    #[test]
    fn invalid_pmfs() {
        assert!(JointPmf::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(JointPmf::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(JointPmf::new(vec![vec![0.5], vec![0.25, 0.25]]).is_err());
    }

    #[test]
    fn merge_cost_examples() {
        assert!((merge_cost(&bell(BellState::PhiPlus)).unwrap().get() + 1.0).abs() < 1e-12);
        assert_eq!(ebits_distillable(merge_cost(&bell(BellState::PhiPlus)).unwrap()).round(), 1.0);
        assert!((merge_cost(&DensityMatrix::maximally_mixed(vec![2, 2])).unwrap().get() - 1.0).abs() < 1e-12);
        let mut rng = rng_for(4);
        let ra = DensityMatrix::from_raw(ginibre(2, 2, &mut rng), vec![2]);
        let rb = DensityMatrix::from_raw(ginibre(2, 2, &mut rng), vec![2]);
        let cost = merge_cost(&ra.tensor(&rb)).unwrap().get();
        assert!((cost - ra.entropy().get()).abs() < 1e-12);
        assert!(matches!(merge_cost(&DensityMatrix::maximally_mixed(vec![4])), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn bell_simulation_dephases() {
        let rho = bell(BellState::PhiPlus);
        let sim = simulate_measurement_via_ancilla(&rho, &Measurement::computational(2)).unwrap();
        let post = sim.dephased.partial_trace(&[0, 1]).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.5, 0.0);
        expected[(3, 3)] = c(0.5, 0.0);
        assert!(distance(post.data(), &expected) < 1e-12);
    }

    #[test]
    fn product_state_simulation_keeps_zero_information() {
        let mut rng = rng_for(8);
        let ra = DensityMatrix::from_raw(ginibre(2, 2, &mut rng), vec![2]);
        let rb = DensityMatrix::from_raw(ginibre(2, 2, &mut rng), vec![2]);
        let ledger = merge_markup(&ra.tensor(&rb), &Measurement::projective_qubit(0.4, 1.9)).unwrap();
        assert!(ledger.transcript.mutual_info_with_ancilla.get().abs() < 1e-9);
        assert!(ledger.transcript.mutual_info_after.get().abs() < 1e-9);
    }

    #[test]
    fn ancilla_ensemble_matches_direct_measurement() {
        let mut rng = rng_for(13);
        for k in 0..20 {
            let rho = DensityMatrix::from_raw(ginibre(4, 1 + k % 4, &mut rng), vec![2, 2]);
            let m = Measurement::projective_qubit(0.3 * k as f64, 0.5 * k as f64);
            let sim = simulate_measurement_via_ancilla(&rho, &m).unwrap();
            let direct = measure_b(&rho, &m).unwrap();
            for i in 0..2 {
                assert!((sim.ensemble.probs[i] - direct.probs[i]).abs() < 1e-9);
                assert!(distance(sim.ensemble.conditional_states[i].data(), direct.conditional_states[i].data()) < 1e-9);
            }
        }
    }

    #[test]
    fn povm_simulation_keeps_record_in_ancilla() {
        let mut rng = rng_for(21);
        let vectors: Vec<CVector> = (0..4).map(|_| ginibre(2, 1, &mut rng).column(0).into_owned()).collect();
        let m = Measurement::rank_one_povm(&vectors).unwrap();
        let rho = DensityMatrix::from_raw(ginibre(4, 4, &mut rng), vec![2, 2]);
        let sim = simulate_measurement_via_ancilla(&rho, &m).unwrap();
        let direct = measure_b(&rho, &m).unwrap();
        let ledger = merge_markup(&rho, &m).unwrap();
        let expected = crate::measurement::conditional_entropy_measured(&direct);
        assert!((ledger.cost_after.get() - expected.get()).abs() < 1e-9);
        assert!(distance(sim.post_measurement_state().data(), direct.post_joint.data()) < 1e-9);
    }

    #[test]
    fn bell_ledger() {
        let ledger = merge_markup(&bell(BellState::PhiPlus), &Measurement::computational(2)).unwrap();
        assert!((ledger.cost_before.get() + 1.0).abs() < 1e-12);
        assert!(ledger.cost_after.get().abs() < 1e-12);
        assert!((ledger.markup.get() - 1.0).abs() < 1e-12);
        assert!((ledger.ebits_distillable_before - 1.0).abs() < 1e-12);
        assert_eq!(ledger.transcript.unitary_sha256.len(), 64);
        assert!((ledger.transcript.cond_entropy_with_ancilla.get() - ledger.cost_before.get()).abs() < 1e-9);
    }

    #[test]
    fn classical_quantum_ledger_has_no_markup_in_its_basis() {
        let (rho, basis) = random_classical_quantum(2, 2, 31);
        let m = Measurement::from_basis(&basis).unwrap();
        assert!(merge_markup(&rho, &m).unwrap().markup.get().abs() < 1e-7);
    }

    #[test]
    fn pure_state_ledger() {
        let psi = PureState::normalized(CVector::from_vec(vec![c(0.6, 0.), c(0.2, 0.1), c(0.3, 0.), c(0.5, -0.4)]), vec![2, 2]).unwrap();
        let rho = psi.density();
        let s_a = rho.entropy_of(&[0]).unwrap().get();
        let opt = minimize_markup(&rho, &OptimizerConfig::default()).unwrap();
        let ledger = merge_markup(&rho, &opt.measurement).unwrap();
        assert!((ledger.cost_before.get() + s_a).abs() < 1e-8);
        assert!(ledger.cost_after.get().abs() < 1e-6);
        assert!((ledger.markup.get() - s_a).abs() < 1e-5);
    }

    #[test]
    fn ssa_examples() {
        let q = DensityMatrix::maximally_mixed(vec![2]);
        assert!(check_ssa(&q.tensor(&q).tensor(&q)).unwrap().abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut ghz = CVector::zeros(8);
        ghz[0] = c(s, 0.0);
        ghz[7] = c(s, 0.0);
        let ghz = PureState::new(ghz, vec![2, 2, 2]).unwrap().density();
        assert!((check_ssa(&ghz).unwrap() - 1.0).abs() < 1e-9);
        assert!(matches!(check_ssa(&bell(BellState::PhiPlus)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn ssa_random_three_qubit() {
        let mut rng = rng_for(1000);
        for k in 0..1000 {
            let rho = DensityMatrix::from_raw(ginibre(8, 1 + k % 8, &mut rng), vec![2, 2, 2]);
            assert!(check_ssa(&rho).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn simulation_preserves_information_with_ancilla() {
        let mut rng = rng_for(200);
        for k in 0..200 {
            let rho = DensityMatrix::from_raw(ginibre(4, 1 + k % 4, &mut rng), vec![2, 2]);
            let m = Measurement::projective_qubit(rand::Rng::random::<f64>(&mut rng) * 3.0, k as f64);
            let ledger = merge_markup(&rho, &m).unwrap();
            let i_ab = mutual_information(&rho).unwrap().get();
            assert!((ledger.transcript.mutual_info_with_ancilla.get() - i_ab).abs() <= 1e-8);
            assert!(ledger.transcript.mutual_info_after.get() <= i_ab + 1e-8);
            assert!(ledger.cost_after.get() >= ledger.transcript.cond_entropy_with_ancilla.get() - 1e-8);
            assert!(ledger.markup.get() >= -1e-7);
        }
    }
}
