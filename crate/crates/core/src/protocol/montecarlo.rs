//! Monte-Carlo estimates of the Haar averages, used to cross-check the closed forms.

use serde::{Deserialize, Serialize};

use super::{average_teleported_closed, teleport_all};
use crate::error::Result;
use crate::fock::{sample_haar, seeded_rng, ResourceState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarloSettings {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0 }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    fn from_samples(values: impl Iterator<Item = f64>) -> Self {
        let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for v in values {
            n += 1;
            let delta = v - mean;
            mean += delta / n as f64;
            m2 += delta * (v - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Self { mean, std_error: (var / n.max(1) as f64).sqrt(), samples: n }
    }

    /// Whether `expected` lies within `sigmas` standard errors of the mean.
    pub fn agrees_with(&self, expected: f64, sigmas: f64) -> bool {
        (self.mean - expected).abs() <= sigmas * self.std_error
    }
}

/// Haar average of `⟨ψ|T[|ψ⟩⟨ψ|]|ψ⟩`.
pub fn fidelity_monte_carlo(rho: &ResourceState, n: usize, settings: MonteCarloSettings) -> Result<Estimate> {
    let mut rng = seeded_rng(settings.seed);
    let mut values = Vec::with_capacity(settings.samples);
    for _ in 0..settings.samples {
        let psi = sample_haar(n, &mut rng);
        values.push(average_teleported_closed(&psi, rho)?.overlap(&psi)?);
    }
    Ok(Estimate::from_samples(values.into_iter()))
}

/// Haar average of `Σ_{l,λ} p_{(l,λ)} N(ρ14^{(l,λ)})`.
pub fn avg_entanglement_monte_carlo(rho: &ResourceState, n: usize, settings: MonteCarloSettings) -> Result<Estimate> {
    let mut rng = seeded_rng(settings.seed);
    let mut values = Vec::with_capacity(settings.samples);
    for _ in 0..settings.samples {
        let psi = sample_haar(n, &mut rng);
        let e: f64 = teleport_all(&psi, rho)?.iter().map(|o| o.probability * o.negativity()).sum();
        values.push(e);
    }
    Ok(Estimate::from_samples(values.into_iter()))
}
