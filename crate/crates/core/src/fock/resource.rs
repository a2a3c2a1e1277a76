use nalgebra::{DMatrix, DVector};

use super::{validate_density, PureTwoModeState, TwoModeDensityMatrix, C64};
use crate::error::{Error, Result};

/// The shared two-mode state of `ν` particles, `Σ_{k,j} ρ_{k,j} |k⟩⟨j| ⊗ |ν−k⟩⟨ν−j|`.
///
/// Pure states and dephased pure states keep an `O(ν)` representation so
/// that the banded performance sums stay cheap for `ν` in the thousands;
/// everything else is stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceState {
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pure(DVector<C64>),
    /// `ρ_{k,j} = x_k x̄_j exp(log_coherence[|k−j|])`, `log_coherence[0] = 0`.
    Damped {
        amplitudes: DVector<C64>,
        log_coherence: Vec<f64>,
    },
    Dense(DMatrix<C64>),
}

impl ResourceState {
    /// A pure resource from normalized amplitudes `x_k`.
    pub fn pure(amplitudes: DVector<C64>) -> Result<Self> {
        let psi = PureTwoModeState::new(amplitudes)?;
        Ok(Self::from_pure(&psi))
    }

    pub fn pure_unnormalized(amplitudes: DVector<C64>) -> Result<Self> {
        let psi = PureTwoModeState::from_unnormalized(amplitudes)?;
        Ok(Self::from_pure(&psi))
    }

    pub fn from_pure(psi: &PureTwoModeState) -> Self {
        Self { repr: Repr::Pure(psi.amplitudes().clone()) }
    }

    /// A general (possibly mixed) resource; the matrix is validated.
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        validate_density(&matrix)?;
        Ok(Self { repr: Repr::Dense(matrix) })
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { repr: Repr::Dense(matrix) }
    }

    pub(crate) fn damped(amplitudes: DVector<C64>, log_coherence: Vec<f64>) -> Self {
        debug_assert_eq!(amplitudes.len(), log_coherence.len());
        debug_assert_eq!(log_coherence[0], 0.0);
        Self { repr: Repr::Damped { amplitudes, log_coherence } }
    }

    pub fn n_particles(&self) -> usize {
        self.dim() - 1
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Pure(x) => x.len(),
            Repr::Damped { amplitudes, .. } => amplitudes.len(),
            Repr::Dense(m) => m.nrows(),
        }
    }

    #[inline]
    pub fn entry(&self, k: usize, j: usize) -> C64 {
        match &self.repr {
            Repr::Pure(x) => x[k] * x[j].conj(),
            Repr::Damped { amplitudes, log_coherence } => {
                let d = k.abs_diff(j);
                amplitudes[k] * amplitudes[j].conj() * log_coherence[d].exp()
            }
            Repr::Dense(m) => m[(k, j)],
        }
    }

    pub fn population(&self, k: usize) -> f64 {
        self.entry(k, k).re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.population(k)).collect()
    }

    /// Amplitudes `x_k` when the state is stored as a pure state.
    pub fn pure_amplitudes(&self) -> Option<&DVector<C64>> {
        match &self.repr {
            Repr::Pure(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_pure_repr(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub(crate) fn damped_parts(&self) -> Option<(&DVector<C64>, &[f64])> {
        match &self.repr {
            Repr::Damped { amplitudes, log_coherence } => Some((amplitudes, log_coherence)),
            _ => None,
        }
    }

    pub(crate) fn dense(&self) -> Option<&DMatrix<C64>> {
        match &self.repr {
            Repr::Dense(m) => Some(m),
            _ => None,
        }
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Pure(x) => x * x.adjoint(),
            _ => {
                let n = self.dim();
                DMatrix::from_fn(n, n, |k, j| self.entry(k, j))
            }
        }
    }

    pub fn to_density_matrix(&self) -> TwoModeDensityMatrix {
        TwoModeDensityMatrix::from_matrix_unchecked(self.to_matrix())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|k| self.population(k)).sum()
    }

    /// `Σ_{k≠j} |ρ_{k,j}| / 2`.
    pub fn negativity(&self) -> f64 {
        match &self.repr {
            Repr::Pure(x) => {
                let l1: f64 = x.iter().map(|c| c.norm()).sum();
                ((l1 * l1 - x.norm_squared()) / 2.0).max(0.0)
            }
            Repr::Damped { amplitudes, log_coherence } => {
                let n = amplitudes.len();
                let mods: Vec<f64> = amplitudes.iter().map(|c| c.norm()).collect();
                let mut total = 0.0;
                for d in 1..n {
                    let w = log_coherence[d].exp();
                    let band: f64 = (0..n - d).map(|k| mods[k] * mods[k + d]).sum();
                    total += 2.0 * w * band;
                }
                total / 2.0
            }
            Repr::Dense(m) => super::off_diagonal_modulus_sum(m) / 2.0,
        }
    }

    /// Runs the full Hermitian, trace and eigenvalue checks on the materialized matrix.
    pub fn validate(&self) -> Result<()> {
        validate_density(&self.to_matrix())
    }

    /// Conjugation by `diag(e^{iθ(k)})`.
    pub fn with_phases<F: Fn(usize) -> f64>(&self, theta: F) -> Self {
        let phases: Vec<C64> = (0..self.dim()).map(|k| C64::from_polar(1.0, theta(k))).collect();
        let repr = match &self.repr {
            Repr::Pure(x) => Repr::Pure(DVector::from_fn(x.len(), |k, _| x[k] * phases[k])),
            Repr::Damped { amplitudes, log_coherence } => Repr::Damped {
                amplitudes: DVector::from_fn(amplitudes.len(), |k, _| amplitudes[k] * phases[k]),
                log_coherence: log_coherence.clone(),
            },
            Repr::Dense(m) => {
                Repr::Dense(DMatrix::from_fn(m.nrows(), m.ncols(), |k, j| m[(k, j)] * phases[k] * phases[j].conj()))
            }
        };
        Self { repr }
    }

    pub(crate) fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "resource states have {} and {} particles",
                self.n_particles(),
                other.n_particles()
            )));
        }
        Ok(())
    }
}
