//! Truncated Fock-space numerics: states on the basis `|0⟩ … |N⟩`,
//! displacement operators, photon distributions and state metrics.

mod density;
mod displacement;
mod distribution;
mod metrics;
pub(crate) mod special;
mod states;

pub use density::{CMatrix, DensityMatrix, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
pub use displacement::{displacement_margin, displacement_matrix};
pub use distribution::{photon_distribution, PhotonDistribution};
pub use metrics::{fidelity_to_pure, purity, state_metrics, trace_distance, StateMetrics};
pub use states::{
    choose_cutoff, make_state, tail_mass, Cutoff, StateSpec, CUTOFF_CEILING, DEFAULT_TAIL_TOL,
};
