//! Teleportation of two-mode bosonic states through a shared multi-particle
//! resource: the measurement-and-correction protocol, its closed-form
//! performance functionals, resource-state constructors, the large-`ν`
//! continuum limit and noise channels.

// NaN-rejecting range checks are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuum;
pub mod error;
pub mod fock;
pub mod noise;
pub mod ode;
pub mod oracle;
pub mod protocol;
pub mod quad;
pub mod resources;

pub use error::{Error, Result};
pub use fock::{PureTwoModeState, ResourceState, TwoModeDensityMatrix, C64};
pub use protocol::{
    avg_entanglement_closed, fidelity_closed, max_avg_entanglement, performance, separable_fidelity,
    MeasurementBasis, Outcome, PerformanceReport,
};
