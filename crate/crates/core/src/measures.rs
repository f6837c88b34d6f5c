//! Local purity rate and pure-state entanglement.

use serde::Serialize;

use crate::correlations::DiscordResult;
use crate::density::{Bits, DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::linalg::{self, eigvalsh, max_abs, CMatrix, TOL};
use crate::states::BellState;

/// Note attached to every purity report about the quantum deficit.
pub const DEFICIT_NOTE: &str =
    "one-way quantum deficit equals discord only in the many-copy limit; no separate deficit is computed";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityReport {
    /// `log2(d_AB)`.
    pub log_dim: f64,
    pub joint_entropy: Bits,
    pub discord_used: Bits,
    /// `log2(d_AB) - S(A,B) - D(A|B)`.
    pub kappa: f64,
    /// Set when single-copy discord stands in for its many-copy limit
    /// without a known equality (anything but pure, separable or
    /// Bell-diagonal input).
    pub regularization_caveat: bool,
    pub deficit_note: &'static str,
}

/// Local purity rate under one-way classical communication from B, using
/// the single-copy discord in `d`.
pub fn local_purity_rate(state: &DensityMatrix, d: &DiscordResult) -> Result<PurityReport> {
    if state.dims() != d.dims.as_slice() {
        return Err(Error::StateResultMismatch(format!(
            "state dims {:?} but discord was computed for {:?}",
            state.dims(),
            d.dims
        )));
    }
    let log_dim = (state.dim() as f64).log2();
    let joint_entropy = state.entropy();
    let kappa = log_dim - joint_entropy.get() - d.discord.get();
    Ok(PurityReport {
        log_dim,
        joint_entropy,
        discord_used: d.discord,
        kappa,
        regularization_caveat: !single_copy_exact(state),
        deficit_note: DEFICIT_NOTE,
    })
}

/// Pure, PPT on a 2x2 or 2x3 system (hence separable), or Bell-diagonal.
pub fn single_copy_exact(state: &DensityMatrix) -> bool {
    state.is_pure() || is_ppt_separable(state) || is_bell_diagonal(state)
}

/// Peres-Horodecki criterion, decisive only when `d_A d_B <= 6`.
pub fn is_ppt_separable(state: &DensityMatrix) -> bool {
    match state.dims() {
        &[a, b] if a * b <= 6 => state.partial_transpose(1).map(|pt| eigvalsh(&pt)[0] >= -TOL).unwrap_or(false),
        _ => false,
    }
}

pub fn is_bell_diagonal(state: &DensityMatrix) -> bool {
    if state.dims() != [2, 2] {
        return false;
    }
    let basis = CMatrix::from_columns(&BellState::ALL.map(|b| b.vector()));
    let inner = basis.adjoint() * state.data() * &basis;
    let off = inner.clone() - CMatrix::from_diagonal(&inner.diagonal());
    max_abs(&off) <= TOL
}

/// Entanglement entropy `S(rho_A)` of a pure bipartite state.
pub fn pure_state_entanglement(psi: &PureState) -> Result<Bits> {
    entanglement_of_pure_density(&psi.density())
}

/// As [`pure_state_entanglement`], for a density matrix that must be pure.
pub fn entanglement_of_pure_density(rho: &DensityMatrix) -> Result<Bits> {
    if rho.num_subsystems() != 2 {
        return Err(Error::DimensionMismatch(format!("expected a bipartite state, got dims {:?}", rho.dims())));
    }
    let purity = rho.purity();
    if purity < 1.0 - TOL {
        return Err(Error::NotPure { purity });
    }
    let reduced = rho.partial_trace(&[0])?;
    Ok(Bits(linalg::shannon_bits(reduced.eigenvalues())))
}
