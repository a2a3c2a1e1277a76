//! Constructors for resource states.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{seeded_rng, ResourceState, C64};

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(ν+1)^{-1/2} Σ_k |k⟩|ν−k⟩`.
pub fn max_entangled(nu: usize) -> ResourceState {
    let x = DVector::from_element(nu + 1, real(1.0 / ((nu + 1) as f64).sqrt()));
    ResourceState::pure(x).expect("flat amplitudes are normalized")
}

/// `|k⟩⟨k| ⊗ |ν−k⟩⟨ν−k|`.
pub fn fock_separable(nu: usize, k: usize) -> Result<ResourceState> {
    if k > nu {
        return Err(Error::InvalidArgument(format!("occupation {k} exceeds nu={nu}")));
    }
    let mut x = DVector::zeros(nu + 1);
    x[k] = real(1.0);
    ResourceState::pure(x)
}

/// `(|ν,0⟩ + |0,ν⟩)/√2`.
pub fn noon(nu: usize) -> Result<ResourceState> {
    if nu == 0 {
        return Err(Error::InvalidArgument("a N00N state needs nu >= 1".into()));
    }
    let mut x = DVector::zeros(nu + 1);
    x[0] = real(std::f64::consts::FRAC_1_SQRT_2);
    x[nu] = real(std::f64::consts::FRAC_1_SQRT_2);
    ResourceState::pure(x)
}

/// Pure Gaussian amplitudes `x_k ∝ exp(−(k−k₀)²/(4σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub nu: usize,
    pub center: f64,
    pub width: f64,
    /// Set when the width was derived as `σ = ν^β`.
    pub exponent: Option<f64>,
}

impl GaussianSpec {
    pub fn new(nu: usize, center: f64, width: f64) -> Self {
        Self { nu, center, width, exponent: None }
    }

    /// Centered at `ν/2` with `σ = ν^β`.
    pub fn scaled(nu: usize, beta: f64) -> Self {
        Self { nu, center: nu as f64 / 2.0, width: (nu as f64).powf(beta), exponent: Some(beta) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidArgument(format!("Gaussian width must be positive, got {}", self.width)));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidArgument("Gaussian center must be finite".into()));
        }
        Ok(())
    }
}

/// Normalized numerically: `Σ x_k² = 1`.
pub fn gaussian_pure(spec: &GaussianSpec) -> Result<ResourceState> {
    spec.validate()?;
    let inv = 1.0 / (4.0 * spec.width * spec.width);
    let x = DVector::from_fn(spec.nu + 1, |k, _| {
        let d = k as f64 - spec.center;
        real((-d * d * inv).exp())
    });
    ResourceState::pure_unnormalized(x)
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    t.push(0.0);
    for i in 1..=n {
        t.push(t[i - 1] + (i as f64).ln());
    }
    t
}

/// Atomic coherent state
/// `x_k = √binom(ν,k) sin^k(θ/2) cos^{ν−k}(θ/2) e^{ikφ}`; `θ = 0` puts every
/// particle in mode 4.
pub fn su2_coherent(nu: usize, theta: f64, phi: f64) -> Result<ResourceState> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta={theta} outside [0, pi]")));
    }
    if !phi.is_finite() {
        return Err(Error::InvalidArgument("phi must be finite".into()));
    }
    let lf = ln_factorials(nu);
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let log_pow = |base: f64, p: usize| if p == 0 { 0.0 } else { p as f64 * base.ln() };
    let x = DVector::from_fn(nu + 1, |k, _| {
        let ln_binom = lf[nu] - lf[k] - lf[nu - k];
        let modulus = (0.5 * ln_binom + log_pow(s, k) + log_pow(c, nu - k)).exp();
        C64::from_polar(modulus, k as f64 * phi)
    });
    ResourceState::pure_unnormalized(x)
}

/// Two-site Bose-Hubbard parameters,
/// `H = −τ(a₃†a₄ + a₄†a₃) + U(n₃(n₃−1) + n₄(n₄−1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoseHubbardParams {
    pub nu: usize,
    pub tunnelling: f64,
    pub interaction: f64,
}

impl BoseHubbardParams {
    /// Chooses `U` so that `γ = νU/τ` takes the given value.
    pub fn from_gamma(nu: usize, tunnelling: f64, gamma: f64) -> Self {
        Self { nu, tunnelling, interaction: gamma * tunnelling / nu.max(1) as f64 }
    }

    pub fn gamma(&self) -> f64 {
        self.nu as f64 * self.interaction / self.tunnelling
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu == 0 {
            return Err(Error::InvalidArgument("double well needs nu >= 1".into()));
        }
        if !(self.tunnelling > 0.0 && self.tunnelling.is_finite()) {
            return Err(Error::InvalidArgument(format!("tunnelling must be positive, got {}", self.tunnelling)));
        }
        if !self.gamma().is_finite() {
            return Err(Error::InvalidArgument("gamma must be finite".into()));
        }
        Ok(())
    }

    pub fn diagonal(&self, k: usize) -> f64 {
        let (k, r) = (k as f64, (self.nu - k) as f64);
        self.interaction * (k * (k - 1.0) + r * (r - 1.0))
    }

    /// `⟨k+1|H|k⟩`.
    pub fn hopping(&self, k: usize) -> f64 {
        -self.tunnelling * (((k + 1) * (self.nu - k)) as f64).sqrt()
    }

    /// The full `(ν+1)×(ν+1)` Hamiltonian in the Fock basis.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let d = self.nu + 1;
        let mut h = DMatrix::zeros(d, d);
        for k in 0..d {
            h[(k, k)] = self.diagonal(k);
            if k + 1 < d {
                h[(k + 1, k)] = self.hopping(k);
                h[(k, k + 1)] = self.hopping(k);
            }
        }
        h
    }
}

/// Ground state of the double-well Hamiltonian with non-negative amplitudes.
///
/// The hopping terms are negative, so the ground state is non-degenerate,
/// positive and even under `k ↔ ν−k`. Diagonalizing only the even sector
/// keeps the symmetric combination even when the tunnelling splitting of
/// the attractive regime falls below machine precision.
pub fn double_well_ground(params: &BoseHubbardParams) -> Result<ResourceState> {
    params.validate()?;
    let nu = params.nu;
    let half = nu / 2;
    let fold = |k: usize| -> (usize, f64) {
        let a = k.min(nu - k);
        let s = if 2 * k == nu { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
        (a, s)
    };
    let mut h = DMatrix::<f64>::zeros(half + 1, half + 1);
    for k in 0..=nu {
        let (a, s) = fold(k);
        h[(a, a)] += s * s * params.diagonal(k);
        if k < nu {
            let (b, t) = fold(k + 1);
            let v = s * t * params.hopping(k);
            h[(a, b)] += v;
            h[(b, a)] += v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
    let v = eig.eigenvectors.column(idx);
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("eigen-solver returned non-finite ground state".into()));
    }
    let mut x: Vec<f64> = (0..=nu).map(|k| {
        let (a, s) = fold(k);
        s * v[a]
    }).collect();
    let pivot = x.iter().copied().fold(0.0f64, |m, c| if c.abs() > m.abs() { c } else { m });
    if pivot < 0.0 {
        x.iter_mut().for_each(|c| *c = -*c);
    }
    ResourceState::pure_unnormalized(DVector::from_iterator(nu + 1, x.into_iter().map(real)))
}

/// Conjugation by `diag(e^{iθ(k)})`.
pub fn apply_phases<F: Fn(usize) -> f64>(rho: &ResourceState, theta: F) -> ResourceState {
    rho.with_phases(theta)
}

/// `G G† / tr(G G†)` for a `(ν+1)×rank` complex Gaussian `G`.
pub fn random_mixed<R: Rng + ?Sized>(nu: usize, rank: usize, rng: &mut R) -> ResourceState {
    let g = DMatrix::from_fn(nu + 1, rank.max(1), |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let mut m = &g * g.adjoint();
    let tr = m.trace();
    m /= tr;
    // enforce exact Hermiticity after the division
    let m = (&m + m.adjoint()) * real(0.5);
    ResourceState::from_matrix(m).expect("Wishart matrices are valid states")
}

pub fn random_pure<R: Rng + ?Sized>(nu: usize, rng: &mut R) -> ResourceState {
    ResourceState::from_pure(&crate::fock::sample_haar(nu, rng))
}

/// Mean and variance of the imbalance `z = 1 − 2k/ν` in the populations of `ρ`.
pub fn imbalance_moments(rho: &ResourceState) -> (f64, f64) {
    let nu = rho.n_particles().max(1) as f64;
    let pops = rho.populations();
    let z = |k: usize| 1.0 - 2.0 * k as f64 / nu;
    let mean: f64 = pops.iter().enumerate().map(|(k, p)| p * z(k)).sum();
    let second: f64 = pops.iter().enumerate().map(|(k, p)| p * z(k) * z(k)).sum();
    (mean, second - mean * mean)
}

/// Imbalance values `z` at the strict local maxima of the populations that
/// carry at least `min_fraction` of the global maximum.
pub fn population_peaks(rho: &ResourceState, min_fraction: f64) -> Vec<f64> {
    let pops = rho.populations();
    let nu = rho.n_particles().max(1) as f64;
    let top = pops.iter().copied().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    for k in 0..pops.len() {
        let left = if k == 0 { f64::NEG_INFINITY } else { pops[k - 1] };
        let right = if k + 1 == pops.len() { f64::NEG_INFINITY } else { pops[k + 1] };
        if pops[k] > left && pops[k] >= right && pops[k] >= min_fraction * top {
            peaks.push(1.0 - 2.0 * k as f64 / nu);
        }
    }
    peaks.sort_by(f64::total_cmp);
    peaks
}

/// A resource state addressed by name, resolved once `ν` is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResourceSpec {
    MaxEntangled,
    Fock {
        occupation: usize,
    },
    Noon,
    Gaussian {
        #[serde(default)]
        center: Option<f64>,
        #[serde(default)]
        center_fraction: Option<f64>,
        #[serde(default)]
        width: Option<f64>,
        #[serde(default)]
        beta: Option<f64>,
    },
    Su2Coherent {
        theta: f64,
        #[serde(default)]
        phi: f64,
    },
    DoubleWell {
        #[serde(default = "unit")]
        tunnelling: f64,
        #[serde(default)]
        gamma: Option<f64>,
        /// `γ = ν^p`.
        #[serde(default)]
        gamma_exponent: Option<f64>,
        #[serde(default)]
        interaction: Option<f64>,
    },
    /// `θ(k) = linear·k + quadratic·k²` applied to `base`.
    Phased {
        base: Box<ResourceSpec>,
        #[serde(default)]
        linear: f64,
        #[serde(default)]
        quadratic: f64,
    },
    RandomMixed {
        rank: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Explicit `(ν+1)×(ν+1)` matrix as rows of `[re, im]` pairs.
    Matrix {
        rows: Vec<Vec<[f64; 2]>>,
    },
}

fn unit() -> f64 {
    1.0
}

impl ResourceSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::MaxEntangled => "max_entangled",
            Self::Fock { .. } => "fock",
            Self::Noon => "noon",
            Self::Gaussian { .. } => "gaussian",
            Self::Su2Coherent { .. } => "su2_coherent",
            Self::DoubleWell { .. } => "double_well",
            Self::Phased { .. } => "phased",
            Self::RandomMixed { .. } => "random_mixed",
            Self::Matrix { .. } => "matrix",
        }
    }

    pub fn gaussian_spec(&self, nu: usize) -> Result<Option<GaussianSpec>> {
        let Self::Gaussian { center, center_fraction, width, beta } = self else {
            return Ok(None);
        };
        let center = match (center, center_fraction) {
            (Some(_), Some(_)) => return Err(Error::InvalidArgument("give either center or center_fraction".into())),
            (Some(c), None) => *c,
            (None, f) => f.unwrap_or(0.5) * nu as f64,
        };
        let spec = match (width, beta) {
            (Some(w), None) => GaussianSpec::new(nu, center, *w),
            (None, Some(b)) => GaussianSpec { exponent: Some(*b), ..GaussianSpec::new(nu, center, (nu as f64).powf(*b)) },
            _ => return Err(Error::InvalidArgument("Gaussian needs exactly one of width or beta".into())),
        };
        spec.validate()?;
        Ok(Some(spec))
    }

    pub fn bose_hubbard(&self, nu: usize) -> Result<Option<BoseHubbardParams>> {
        let Self::DoubleWell { tunnelling, gamma, gamma_exponent, interaction } = self else {
            return Ok(None);
        };
        let params = match (gamma, gamma_exponent, interaction) {
            (Some(g), None, None) => BoseHubbardParams::from_gamma(nu, *tunnelling, *g),
            (None, Some(p), None) => BoseHubbardParams::from_gamma(nu, *tunnelling, (nu as f64).powf(*p)),
            (None, None, Some(u)) => BoseHubbardParams { nu, tunnelling: *tunnelling, interaction: *u },
            _ => {
                return Err(Error::InvalidArgument(
                    "double well needs exactly one of gamma, gamma_exponent or interaction".into(),
                ))
            }
        };
        params.validate()?;
        Ok(Some(params))
    }

    pub fn build(&self, nu: usize) -> Result<ResourceState> {
        match self {
            Self::MaxEntangled => Ok(max_entangled(nu)),
            Self::Fock { occupation } => fock_separable(nu, *occupation),
            Self::Noon => noon(nu),
            Self::Gaussian { .. } => gaussian_pure(&self.gaussian_spec(nu)?.expect("gaussian variant")),
            Self::Su2Coherent { theta, phi } => su2_coherent(nu, *theta, *phi),
            Self::DoubleWell { .. } => double_well_ground(&self.bose_hubbard(nu)?.expect("double-well variant")),
            Self::Phased { base, linear, quadratic } => {
                let (a, b) = (*linear, *quadratic);
                Ok(apply_phases(&base.build(nu)?, |k| a * k as f64 + b * (k * k) as f64))
            }
            Self::RandomMixed { rank, seed } => {
                if *rank == 0 {
                    return Err(Error::InvalidArgument("random_mixed needs rank >= 1".into()));
                }
                Ok(random_mixed(nu, *rank, &mut seeded_rng(*seed)))
            }
            Self::Matrix { rows } => {
                if rows.len() != nu + 1 || rows.iter().any(|r| r.len() != nu + 1) {
                    return Err(Error::Dimension(format!("explicit matrix must be {0}x{0}", nu + 1)));
                }
                let m = DMatrix::from_fn(nu + 1, nu + 1, |k, j| C64::new(rows[k][j][0], rows[k][j][1]));
                ResourceState::from_matrix(m)
            }
        }
    }
}
