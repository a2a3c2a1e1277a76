//! Fock-basis representations of two-mode states with a fixed particle number.
//!
//! A two-mode state of `M` particles lives in the span of `|k⟩⊗|M−k⟩`,
//! `k = 0..=M`, so both pure states and density matrices are indexed by the
//! occupation `k` of the first mode.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

mod resource;
pub use resource::ResourceState;

pub type C64 = Complex64;

/// Absolute tolerance for normalization and Hermiticity at construction time.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

/// Eigenvalue floor accepted by the positivity check.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Amplitudes below this modulus count as absent in `is_product_pure`.
pub const SUPPORT_TOL: f64 = 1e-10;

/// `Σ_k c_k |k⟩⊗|N−k⟩` with `Σ|c_k|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureTwoModeState {
    amplitudes: DVector<C64>,
}

impl PureTwoModeState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("a pure state needs at least one amplitude".into()));
        }
        let norm_sq = amplitudes.norm_squared();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!(
                "amplitudes have squared norm {norm_sq}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes` before construction.
    pub fn from_unnormalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self { amplitudes: amplitudes.unscale(norm) })
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amplitudes))
    }

    pub fn n_particles(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> C64 {
        self.amplitudes[k]
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        Self { amplitudes: self.amplitudes.scale_complex(phase) }
    }

    pub fn density_matrix(&self) -> TwoModeDensityMatrix {
        TwoModeDensityMatrix { matrix: &self.amplitudes * self.amplitudes.adjoint() }
    }
}

trait ScaleComplex {
    fn scale_complex(&self, phase: f64) -> Self;
}

impl ScaleComplex for DVector<C64> {
    fn scale_complex(&self, phase: f64) -> Self {
        let u = C64::from_polar(1.0, phase);
        self.map(|c| c * u)
    }
}

/// Checks Hermiticity, unit trace and positivity of a square matrix.
pub fn validate_density(matrix: &DMatrix<C64>) -> Result<()> {
    check_hermitian_unit_trace(matrix)?;
    let min_eig = matrix
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(min_eig >= -SPECTRAL_TOL) {
        return Err(Error::InvalidState(format!(
            "minimum eigenvalue {min_eig:e} below floor -{SPECTRAL_TOL:e}"
        )));
    }
    Ok(())
}

fn check_hermitian_unit_trace(matrix: &DMatrix<C64>) -> Result<()> {
    let (rows, cols) = matrix.shape();
    if rows != cols || rows == 0 {
        return Err(Error::Dimension(format!("density matrix must be square and non-empty, got {rows}x{cols}")));
    }
    for k in 0..rows {
        for j in k..rows {
            let defect = (matrix[(k, j)] - matrix[(j, k)].conj()).norm();
            if !(defect <= CONSTRUCTION_TOL) {
                return Err(Error::InvalidState(format!(
                    "not Hermitian at ({k},{j}): defect {defect:e}"
                )));
            }
        }
    }
    let trace = matrix.trace();
    if !((trace.re - 1.0).abs() <= CONSTRUCTION_TOL && trace.im.abs() <= CONSTRUCTION_TOL) {
        return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
    }
    Ok(())
}

/// Density matrix over `|k⟩⊗|M−k⟩`, `k = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeDensityMatrix {
    matrix: DMatrix<C64>,
}

impl TwoModeDensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        validate_density(&matrix)?;
        Ok(Self { matrix })
    }

    /// Wraps a matrix whose validity follows from how it was built.
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn total_particles(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `⟨ψ|ρ|ψ⟩` for a pure state with the same particle number.
    pub fn overlap(&self, psi: &PureTwoModeState) -> Result<f64> {
        if psi.n_particles() != self.total_particles() {
            return Err(Error::Dimension(format!(
                "state has {} particles, density matrix {}",
                psi.n_particles(),
                self.total_particles()
            )));
        }
        let c = psi.amplitudes();
        Ok((c.adjoint() * &self.matrix * c)[(0, 0)].re)
    }
}

/// `Σ_{k≠j} |ρ_{k,j}| / 2`, the negativity of a two-mode fixed-number state.
pub fn negativity(state: &TwoModeDensityMatrix) -> f64 {
    off_diagonal_modulus_sum(state.matrix()) / 2.0
}

pub(crate) fn off_diagonal_modulus_sum(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            if k != j {
                total += m[(k, j)].norm();
            }
        }
    }
    total
}

/// Negativity from its definition: embed the state in the product space of
/// the two modes, transpose the second mode and sum the absolute eigenvalues.
pub fn negativity_partial_transpose(state: &TwoModeDensityMatrix) -> f64 {
    let m = state.total_particles();
    let dim = m + 1;
    let mut full = DMatrix::<C64>::zeros(dim * dim, dim * dim);
    for k in 0..dim {
        for j in 0..dim {
            full[(k * dim + (m - k), j * dim + (m - j))] = state.matrix()[(k, j)];
        }
    }
    bipartite_negativity(&full, dim, dim)
}

/// `(tr|ρ^{T_B}| − tr ρ)/2` for an operator on `C^{dim_a} ⊗ C^{dim_b}`
/// indexed as `a·dim_b + b`. The trace is subtracted rather than 1 so the
/// function applies to unnormalized operators as well.
pub fn bipartite_negativity(matrix: &DMatrix<C64>, dim_a: usize, dim_b: usize) -> f64 {
    let d = dim_a * dim_b;
    assert_eq!(matrix.shape(), (d, d), "operator shape does not match dim_a*dim_b");
    let mut pt = DMatrix::<C64>::zeros(d, d);
    for a in 0..dim_a {
        for b in 0..dim_b {
            for a2 in 0..dim_a {
                for b2 in 0..dim_b {
                    pt[(a * dim_b + b, a2 * dim_b + b2)] = matrix[(a * dim_b + b2, a2 * dim_b + b)];
                }
            }
        }
    }
    let abs_sum: f64 = pt.symmetric_eigenvalues().iter().map(|e| e.abs()).sum();
    (abs_sum - matrix.trace().re) / 2.0
}

/// True iff exactly one amplitude has modulus above [`SUPPORT_TOL`], i.e. the
/// state is a single Fock product `|k⟩⊗|N−k⟩`.
pub fn is_product_pure(state: &PureTwoModeState) -> bool {
    state.amplitudes().iter().filter(|c| c.norm() > SUPPORT_TOL).count() == 1
}

/// Draws a Haar-random pure state by normalizing `N+1` independent standard
/// complex Gaussians.
pub fn sample_haar<R: Rng + ?Sized>(n_particles: usize, rng: &mut R) -> PureTwoModeState {
    loop {
        let v = DVector::from_fn(n_particles + 1, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        if let Ok(state) = PureTwoModeState::from_unnormalized(v) {
            return state;
        }
    }
}

pub fn sample_haar_seeded(n_particles: usize, seed: u64) -> PureTwoModeState {
    sample_haar(n_particles, &mut seeded_rng(seed))
}

/// The generator used everywhere a seed is accepted.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
