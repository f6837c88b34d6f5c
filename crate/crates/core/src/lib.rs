//! Quantum discord, classical correlation and state-merging cost accounting
//! for finite-dimensional bipartite states.
//!
//! All entropies are in bits. Measurements act on the second subsystem of a
//! bipartite state, so `discord` computes `D(A|B)`.

pub mod commands;
pub mod correlations;
pub mod density;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod measures;
pub mod merging;
pub mod optimize;
pub mod report;
pub mod states;
pub mod verify;

pub use correlations::{
    classical_correlation, discord, discord_via_markup, is_zero_discord, mutual_information, DiscordResult,
    ZeroDiscordTest,
};
pub use density::{Bits, DensityMatrix, PureState};
pub use error::{Error, Result};
pub use measurement::{
    conditional_entropy_measured, measure_b, neumark_extend, post_measurement_mutual_info, MeasuredEnsemble,
    Measurement, MeasurementKind, NeumarkDilation,
};
pub use measures::{local_purity_rate, pure_state_entanglement, PurityReport};
pub use merging::{
    check_ssa, classical_merge_cost, merge_cost, merge_markup, simulate_measurement_via_ancilla, JointPmf, MergeLedger,
};
pub use optimize::OptimizerConfig;
pub use states::{make, sample_batch, Family, StateSpec};
