//! Measurements on the second subsystem of a bipartite state: POVM
//! representation, Neumark dilation, post-measurement ensembles and the
//! post-measurement mutual information.

use serde::{Deserialize, Serialize};

use crate::density::{Bits, DensityMatrix};
use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::linalg::{
    self, c, eigvalsh, hermitian_residual, inv_sqrt_pd, max_abs, orthonormalize, sqrt_psd, trace, CMatrix, CVector, TOL,
    ZERO,
};

/// Outcomes with probability at or below this are flagged as negligible.
pub const ZERO_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementKind {
    #[serde(rename = "projective")]
    ProjectiveRank1,
    #[serde(rename = "povm")]
    Povm,
}

/// A POVM on one subsystem. Elements are positive semidefinite and sum to
/// the identity; projective rank-1 measurements additionally consist of
/// mutually orthogonal rank-1 projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    elements: Vec<CMatrix>,
    kind: MeasurementKind,
    params: Option<Vec<f64>>,
}

impl Measurement {
    pub fn new(elements: Vec<CMatrix>, kind: MeasurementKind) -> Result<Self> {
        let d = elements.first().map(|e| e.nrows()).ok_or_else(|| Error::InvalidMeasurement("no elements".into()))?;
        let mut sum = CMatrix::zeros(d, d);
        for (i, e) in elements.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::InvalidMeasurement(format!("element {i} is not {d}x{d}")));
            }
            let herm = hermitian_residual(e);
            if herm > TOL {
                return Err(Error::InvalidMeasurement(format!("element {i} is not Hermitian (residual {herm:e})")));
            }
            let min = eigvalsh(e)[0];
            if min < -TOL {
                return Err(Error::InvalidMeasurement(format!("element {i} has eigenvalue {min:e}")));
            }
            sum += e;
        }
        let completeness = max_abs(&(sum - CMatrix::identity(d, d)));
        if completeness > TOL {
            return Err(Error::InvalidMeasurement(format!("elements sum to identity only within {completeness:e}")));
        }
        if kind == MeasurementKind::ProjectiveRank1 {
            for (i, e) in elements.iter().enumerate() {
                let idem = max_abs(&(e * e - e));
                let tr = (trace(e).re - 1.0).abs();
                if idem > TOL || tr > TOL {
                    return Err(Error::InvalidMeasurement(format!("element {i} is not a rank-1 projector")));
                }
                for (j, f) in elements.iter().enumerate().skip(i + 1) {
                    if max_abs(&(e * f)) > TOL {
                        return Err(Error::InvalidMeasurement(format!("elements {i} and {j} are not orthogonal")));
                    }
                }
            }
        }
        Ok(Self { elements, kind, params: None })
    }

    pub fn with_params(mut self, params: Vec<f64>) -> Self {
        self.params = Some(params);
        self
    }

    /// Projectors onto the Bloch direction (sin t cos p, sin t sin p, cos t)
    /// and its antipode, in that order.
    pub fn projective_qubit(theta: f64, phi: f64) -> Self {
        let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        let phase = c(phi.cos(), phi.sin());
        let up = CVector::from_vec(vec![c(co, 0.0), phase * s]);
        let down = CVector::from_vec(vec![c(s, 0.0), -phase * co]);
        Self {
            elements: vec![linalg::projector(&up), linalg::projector(&down)],
            kind: MeasurementKind::ProjectiveRank1,
            params: Some(vec![theta, phi]),
        }
    }

    /// Rank-1 projective measurement onto the columns of a unitary.
    pub fn from_basis(basis: &CMatrix) -> Result<Self> {
        let residual = linalg::unitarity_residual(basis);
        if residual > TOL {
            return Err(Error::NotUnitary { residual });
        }
        let elements = basis.column_iter().map(|col| linalg::projector(&col.into_owned())).collect();
        Ok(Self { elements, kind: MeasurementKind::ProjectiveRank1, params: None })
    }

    pub fn computational(d: usize) -> Self {
        Self::from_basis(&CMatrix::identity(d, d)).expect("identity is unitary")
    }

    /// Rank-1 POVM `E_i = S^{-1/2} v_i v_i^dagger S^{-1/2}` with `S = sum v_i v_i^dagger`.
    pub fn rank_one_povm(vectors: &[CVector]) -> Result<Self> {
        let d = vectors.first().map(|v| v.len()).ok_or_else(|| Error::InvalidMeasurement("no vectors".into()))?;
        let mut frame = CMatrix::zeros(d, d);
        for v in vectors {
            if v.len() != d {
                return Err(Error::InvalidMeasurement("vectors differ in dimension".into()));
            }
            frame += linalg::projector(v);
        }
        let root = inv_sqrt_pd(&frame)
            .ok_or_else(|| Error::InvalidMeasurement("vectors do not span the space".into()))?;
        let elements: Vec<CMatrix> = vectors.iter().map(|v| linalg::projector(&(&root * v))).collect();
        Ok(Self { elements, kind: MeasurementKind::Povm, params: None })
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }

    pub fn params(&self) -> Option<&[f64]> {
        self.params.as_deref()
    }

    /// Dimension of the measured subsystem.
    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn num_outcomes(&self) -> usize {
        self.elements.len()
    }

    /// Outcome probabilities `tr(E_i rho)` on the measured subsystem alone.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| (e * rho).trace().re).collect()
    }

    /// Neumark dilation with the square-root Kraus operators.
    pub fn neumark_extend(&self) -> Result<NeumarkDilation> {
        neumark_extend(self)
    }

    pub fn to_json(&self) -> MeasurementJson {
        MeasurementJson {
            kind: self.kind,
            params: self.params.clone(),
            elements: self.elements.iter().map(|e| MatrixJson::from_matrix(e, None)).collect(),
        }
    }
}

/// `{"kind":"projective"|"povm", "params":[theta, phi]?, "elements":[matrix...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementJson {
    pub kind: MeasurementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    pub elements: Vec<MatrixJson>,
}

impl MeasurementJson {
    pub fn to_measurement(&self) -> Result<Measurement> {
        let elements = self.elements.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
        let m = Measurement::new(elements, self.kind)?;
        Ok(match &self.params {
            Some(p) => m.with_params(p.clone()),
            None => m,
        })
    }
}

impl Serialize for Measurement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Unitary on B (x) C such that `<i|_C U |psi>_B |0>_C = sqrt(E_i) |psi>`,
/// with the ancilla index as the fast (least significant) factor.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumarkDilation {
    pub ancilla_dim: usize,
    pub unitary: CMatrix,
    pub ancilla_projectors: Vec<CMatrix>,
}

impl NeumarkDilation {
    /// Outcome statistics of measuring the ancilla after the dilation acts
    /// on `rho_b (x) |0><0|`.
    pub fn statistics(&self, rho_b: &CMatrix) -> Vec<f64> {
        let n = self.ancilla_dim;
        let mut anc = CMatrix::zeros(n, n);
        anc[(0, 0)] = c(1.0, 0.0);
        let evolved = &self.unitary * rho_b.kronecker(&anc) * self.unitary.adjoint();
        let d_b = rho_b.nrows();
        self.ancilla_projectors
            .iter()
            .map(|p| (CMatrix::identity(d_b, d_b).kronecker(p) * &evolved).trace().re)
            .collect()
    }
}

pub fn neumark_extend(m: &Measurement) -> Result<NeumarkDilation> {
    let d = m.dim();
    let n = m.num_outcomes();
    let total = d * n;
    let kraus: Vec<CMatrix> = m.elements.iter().map(sqrt_psd).collect();

    // Isometry columns V e_j = sum_i (M_i e_j) (x) e_i sit at the columns
    // of U where the ancilla starts in |0>.
    let mut columns: Vec<Option<CVector>> = vec![None; total];
    let mut basis = Vec::with_capacity(total);
    for j in 0..d {
        let mut v = CVector::zeros(total);
        for (i, k) in kraus.iter().enumerate() {
            for b in 0..d {
                v[b * n + i] = k[(b, j)];
            }
        }
        columns[j * n] = Some(v.clone());
        basis.push(v);
    }
    let gram = CMatrix::from_fn(d, d, |a, b| basis[a].dotc(&basis[b]));
    if max_abs(&(gram - CMatrix::identity(d, d))) > TOL {
        return Err(Error::CompletionFailure { rank: 0, needed: total });
    }

    let mut candidates = (0..total).map(|k| {
        let mut e = CVector::zeros(total);
        e[k] = c(1.0, 0.0);
        e
    });
    for column in columns.iter_mut().filter(|c| c.is_none()) {
        let next = loop {
            match candidates.next() {
                Some(e) => {
                    if let Some(v) = orthonormalize(&e, &basis, 1e-6) {
                        break v;
                    }
                }
                None => return Err(Error::CompletionFailure { rank: basis.len(), needed: total }),
            }
        };
        basis.push(next.clone());
        *column = Some(next);
    }
    let unitary = CMatrix::from_columns(&columns.into_iter().map(|v| v.expect("filled")).collect::<Vec<_>>());
    if linalg::unitarity_residual(&unitary) > TOL {
        return Err(Error::CompletionFailure { rank: total - 1, needed: total });
    }
    let ancilla_projectors = (0..n)
        .map(|i| {
            let mut p = CMatrix::zeros(n, n);
            p[(i, i)] = c(1.0, 0.0);
            p
        })
        .collect();
    Ok(NeumarkDilation { ancilla_dim: n, unitary, ancilla_projectors })
}

/// Ensemble `{p_i, rho_{A|i}}` left on A after B is measured, together
/// with the unconditioned post-measurement state
/// `sum_i p_i rho_{A|i} (x) |i><i|` whose outcome register is ordered like
/// the Neumark ancilla basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredEnsemble {
    pub probs: Vec<f64>,
    pub conditional_states: Vec<DensityMatrix>,
    /// `true` where the outcome probability is at or below 1e-12; the
    /// matching conditional state is a maximally mixed placeholder.
    pub negligible: Vec<bool>,
    pub post_joint: DensityMatrix,
    pub outcome_projectors: Vec<CMatrix>,
}

impl MeasuredEnsemble {
    /// Assembles an ensemble from unnormalized conditional operators
    /// `sigma_i = tr_B((I (x) E_i) rho)`.
    pub(crate) fn from_unnormalized(sigmas: Vec<CMatrix>, d_a: usize) -> Self {
        let n = sigmas.len();
        let mut probs = Vec::with_capacity(n);
        let mut conditional_states = Vec::with_capacity(n);
        let mut negligible = Vec::with_capacity(n);
        let mut post = CMatrix::zeros(d_a * n, d_a * n);
        for (i, sigma) in sigmas.into_iter().enumerate() {
            let p = trace(&sigma).re;
            probs.push(p);
            if p <= ZERO_PROBABILITY {
                negligible.push(true);
                conditional_states.push(DensityMatrix::maximally_mixed(vec![d_a]));
                continue;
            }
            for a in 0..d_a {
                for b in 0..d_a {
                    post[(a * n + i, b * n + i)] = sigma[(a, b)];
                }
            }
            negligible.push(false);
            conditional_states.push(DensityMatrix::from_raw(sigma.unscale(p), vec![d_a]));
        }
        let outcome_projectors = (0..n)
            .map(|i| {
                let mut p = CMatrix::zeros(n, n);
                p[(i, i)] = c(1.0, 0.0);
                p
            })
            .collect();
        Self {
            probs,
            conditional_states,
            negligible,
            post_joint: DensityMatrix::from_raw(post, vec![d_a, n]),
            outcome_projectors,
        }
    }

    /// `sum_i p_i rho_{A|i}` over non-negligible outcomes.
    pub fn averaged_state(&self) -> CMatrix {
        let d_a = self.conditional_states[0].dim();
        self.iter_significant().fold(CMatrix::zeros(d_a, d_a), |acc, (p, rho)| acc + rho.data().scale(p))
    }

    pub fn iter_significant(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.probs
            .iter()
            .zip(&self.conditional_states)
            .zip(&self.negligible)
            .filter(|(_, &skip)| !skip)
            .map(|((&p, rho), _)| (p, rho))
    }
}

fn require_bipartite(state: &DensityMatrix) -> Result<(usize, usize)> {
    match state.dims() {
        &[d_a, d_b] => Ok((d_a, d_b)),
        dims => Err(Error::DimensionMismatch(format!("expected a bipartite state, got dims {dims:?}"))),
    }
}

pub(crate) fn bipartite_dims(state: &DensityMatrix) -> Result<(usize, usize)> {
    require_bipartite(state)
}

/// Measures subsystem B: `p_i = tr((I (x) E_i) rho)`,
/// `rho_{A|i} = tr_B((I (x) E_i) rho) / p_i`.
pub fn measure_b(state: &DensityMatrix, m: &Measurement) -> Result<MeasuredEnsemble> {
    let (d_a, d_b) = require_bipartite(state)?;
    if m.dim() != d_b {
        return Err(Error::DimensionMismatch(format!("measurement acts on dimension {}, B has {d_b}", m.dim())));
    }
    let rho = state.data();
    let sigmas = m
        .elements
        .iter()
        .map(|e| {
            let mut sigma = CMatrix::from_element(d_a, d_a, ZERO);
            for a in 0..d_a {
                for a2 in 0..d_a {
                    let mut acc = ZERO;
                    for b in 0..d_b {
                        for b2 in 0..d_b {
                            acc += rho[(a * d_b + b, a2 * d_b + b2)] * e[(b2, b)];
                        }
                    }
                    sigma[(a, a2)] = acc;
                }
            }
            sigma
        })
        .collect();
    Ok(MeasuredEnsemble::from_unnormalized(sigmas, d_a))
}

/// `sum_i p_i S(rho_{A|i})`; negligible outcomes contribute nothing.
pub fn conditional_entropy_measured(e: &MeasuredEnsemble) -> Bits {
    Bits(e.iter_significant().map(|(p, rho)| p * rho.entropy().get()).sum())
}

/// `I(A':B') = S(A) - sum_i p_i S(rho_{A|i})`.
pub fn post_measurement_mutual_info(state: &DensityMatrix, m: &Measurement) -> Result<Bits> {
    let ensemble = measure_b(state, m)?;
    Ok(state.entropy_of(&[0])? - conditional_entropy_measured(&ensemble))
}

/// The same quantity from the entropies of the post-measurement joint
/// state, `S(A') + S(B') - S(A',B')`.
pub fn post_measurement_mutual_info_joint(e: &MeasuredEnsemble) -> Bits {
    let joint = &e.post_joint;
    let s_a = joint.entropy_of(&[0]).expect("bipartite");
    let s_b = joint.entropy_of(&[1]).expect("bipartite");
    s_a + s_b - joint.entropy()
}
