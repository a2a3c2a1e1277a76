//! Deterministic fixtures shared by the benchmarks.

use modeport::fock::{sample_haar_seeded, seeded_rng, PureTwoModeState, ResourceState};
use modeport::resources::{gaussian_pure, random_mixed, GaussianSpec};

/// Particle numbers for the closed-form scaling benchmarks.
pub const SWEEP_NU: [usize; 4] = [100, 1000, 5000, 20000];

/// Centred Gaussian with `σ = ν^0.75`, the typical convergence-study resource.
pub fn gaussian(nu: usize) -> ResourceState {
    gaussian_pure(&GaussianSpec::scaled(nu, 0.75)).expect("valid Gaussian fixture")
}

pub fn mixed(nu: usize) -> ResourceState {
    random_mixed(nu, 3, &mut seeded_rng(nu as u64))
}

pub fn input(n: usize) -> PureTwoModeState {
    sample_haar_seeded(n, 17)
}
