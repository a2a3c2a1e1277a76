//! Continuum limit of the performance functionals and finite-`ν` checks of
//! the asymptotic convergence statements.
//!
//! Entries are approximated as `ρ_{k,j} ≈ ω(z, y)·2/ν` with imbalances
//! `z = 1 − 2k/ν`, `y = 1 − 2j/ν`. The fidelity kernel
//! `max{0, N+1 − |z−y|ν/2}` vanishes outside the strip
//! `|z−y| ≤ 2(N+1)/ν`, so the double integrals are taken in the rotated
//! variables `u = z − y`, `v = (z + y)/2` with the outer integral over the
//! strip only.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ResourceState, C64};
use crate::protocol::{avg_entanglement_closed, fidelity_closed, max_avg_entanglement};
use crate::quad::{integrate, Tolerance};
use crate::resources::{fock_separable, gaussian_pure, max_entangled, noon, GaussianSpec};

/// Normalization slack accepted by the continuum functionals.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// `1 − f` must fall at least as fast as `ν^{-1/4}` over the fitted range
/// to count as converging.
pub const MIN_DECAY_EXPONENT: f64 = 0.25;

type Amplitude = Arc<dyn Fn(f64) -> C64 + Send + Sync>;
type Density = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;
type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `ω(z, y) = χ̄(z) χ(y)`.
    Pure(Amplitude),
    Density(Density),
    /// `ω(z, y) = ω₊(z + y) ω₋((z − y)α)`.
    Factorized { plus: RealFn, minus: RealFn, alpha: f64 },
}

/// A continuum density `ω(z, y)` on `[−1, 1]²`.
#[derive(Clone)]
pub struct ContinuumProfile {
    kind: Kind,
    scale: f64,
}

impl fmt::Debug for ContinuumProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            Kind::Pure(_) => "pure",
            Kind::Density(_) => "density",
            Kind::Factorized { .. } => "factorized",
        };
        f.debug_struct("ContinuumProfile").field("kind", &kind).field("scale", &self.scale).finish()
    }
}

fn gaussian_amplitude(center: f64, variance: f64) -> impl Fn(f64) -> f64 + Send + Sync {
    let norm = (2.0 * std::f64::consts::PI * variance).powf(-0.25);
    move |z| norm * (-(z - center) * (z - center) / (4.0 * variance)).exp()
}

impl ContinuumProfile {
    pub fn pure<F: Fn(f64) -> C64 + Send + Sync + 'static>(chi: F) -> Self {
        Self { kind: Kind::Pure(Arc::new(chi)), scale: 1.0 }
    }

    pub fn pure_real<F: Fn(f64) -> f64 + Send + Sync + 'static>(chi: F) -> Self {
        Self::pure(move |z| C64::new(chi(z), 0.0))
    }

    pub fn density<F: Fn(f64, f64) -> C64 + Send + Sync + 'static>(omega: F) -> Self {
        Self { kind: Kind::Density(Arc::new(omega)), scale: 1.0 }
    }

    pub fn factorized<P, M>(plus: P, minus: M, alpha: f64) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        M: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { kind: Kind::Factorized { plus: Arc::new(plus), minus: Arc::new(minus), alpha }, scale: 1.0 }
    }

    /// `χ(z) = 1/√2`, the limit of the maximally entangled state.
    pub fn flat() -> Self {
        Self::pure_real(|_| std::f64::consts::FRAC_1_SQRT_2)
    }

    /// `χ(z) = e^{−(z−c)²/(4s²)} / (2πs²)^{1/4}`.
    pub fn gaussian(center: f64, variance: f64) -> Self {
        Self::pure_real(gaussian_amplitude(center, variance))
    }

    /// `(χ_{−z₀} + χ_{z₀})/√2` with Gaussian components of the given variance.
    pub fn two_gaussians(z0: f64, variance: f64) -> Self {
        let (a, b) = (gaussian_amplitude(-z0, variance), gaussian_amplitude(z0, variance));
        Self::pure_real(move |z| (a(z) + b(z)) * std::f64::consts::FRAC_1_SQRT_2)
    }

    /// Continuum ground state of the double well: a single Gaussian of
    /// variance `1/(ν√(γ+1))` for `γ > −1`, and two Gaussians at
    /// `±√(1−1/γ²)` of variance `1/(ν|γ|√(γ²−1))` for `γ < −1`.
    pub fn double_well(nu: usize, gamma: f64) -> Result<Self> {
        let nu = nu as f64;
        if gamma > -1.0 {
            Ok(Self::gaussian(0.0, 1.0 / (nu * (gamma + 1.0).sqrt())))
        } else if gamma < -1.0 {
            let z0 = (1.0 - 1.0 / (gamma * gamma)).sqrt();
            Ok(Self::two_gaussians(z0, 1.0 / (nu * gamma.abs() * (gamma * gamma - 1.0).sqrt())))
        } else {
            Err(Error::Unsupported("no closed-form continuum ground state at gamma = -1".into()))
        }
    }

    pub fn omega(&self, z: f64, y: f64) -> C64 {
        let w = match &self.kind {
            Kind::Pure(chi) => chi(z).conj() * chi(y),
            Kind::Density(omega) => omega(z, y),
            Kind::Factorized { plus, minus, alpha } => C64::new(plus(z + y) * minus((z - y) * alpha), 0.0),
        };
        w * self.scale
    }

    /// `∫_{−1}^{1} ω(z, z) dz`.
    pub fn diagonal_mass(&self) -> Result<f64> {
        integrate(|z| self.omega(z, z).re, -1.0, 1.0, inner_tolerance())
    }

    /// The profile rescaled to unit diagonal mass.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.diagonal_mass()?;
        if !(mass > 0.0) {
            return Err(Error::InvalidState(format!("profile has non-positive diagonal mass {mass}")));
        }
        Ok(Self { kind: self.kind.clone(), scale: self.scale / mass })
    }

    fn check_normalized(&self) -> Result<()> {
        let mass = self.diagonal_mass()?;
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidState(format!("profile diagonal mass is {mass}, expected 1")));
        }
        Ok(())
    }

    /// `x_k = χ(z_k)√(2/ν)` for pure profiles, renormalized to unit norm.
    pub fn discretize(&self, nu: usize) -> Result<ResourceState> {
        let Kind::Pure(chi) = &self.kind else {
            return Err(Error::Unsupported("only pure profiles discretize to amplitudes".into()));
        };
        let nuf = nu as f64;
        let amps = nalgebra::DVector::from_fn(nu + 1, |k, _| chi(1.0 - 2.0 * k as f64 / nuf) * (2.0 / nuf).sqrt());
        ResourceState::pure_unnormalized(amps)
    }
}

fn inner_tolerance() -> Tolerance {
    Tolerance { abs: 1e-14, rel: 1e-12, max_intervals: 4000, initial_panels: 32 }
}

/// `∫∫ max{0, N+1 − |z−y|ν/2} g(ω(z, y)) dz dy` over `[−1, 1]²`.
fn strip_integral<G: Fn(C64) -> f64>(profile: &ContinuumProfile, n: usize, nu: usize, g: G) -> Result<f64> {
    if n == 0 || nu == 0 {
        return Err(Error::InvalidArgument(format!("need N >= 1 and nu >= 1, got N={n}, nu={nu}")));
    }
    let nuf = nu as f64;
    let a = (n + 1) as f64;
    let width = (2.0 * a / nuf).min(2.0);
    let outer = |u: f64| -> Result<f64> {
        let kernel = (a - u.abs() * nuf / 2.0).max(0.0);
        let half = 1.0 - u.abs() / 2.0;
        if kernel == 0.0 || half <= 0.0 {
            return Ok(0.0);
        }
        let inner = integrate(|v| g(profile.omega(v + u / 2.0, v - u / 2.0)), -half, half, inner_tolerance())?;
        Ok(kernel * inner)
    };
    let mut failure = None;
    let mut wrapped = |u: f64| match outer(u) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let tol = Tolerance { abs: 1e-12 / nuf, rel: 1e-11, max_intervals: 2000, initial_panels: 2 };
    let total = integrate(&mut wrapped, -width, 0.0, tol)? + integrate(&mut wrapped, 0.0, width, tol)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `f ≈ 1/(N+2) + (ν/2) ∫∫ max{0, N+1 − |z−y|ν/2} ω(z, y) / ((N+1)(N+2))`.
pub fn fidelity_continuum(profile: &ContinuumProfile, n: usize, nu: usize) -> Result<f64> {
    profile.check_normalized()?;
    let s = strip_integral(profile, n, nu, |w| w.re)?;
    let (a, b) = ((n + 1) as f64, (n + 2) as f64);
    Ok(1.0 / b + nu as f64 / 2.0 * s / (a * b))
}

/// `E ≈ −π/8 + (πν/16) ∫∫ max{0, N+1 − |z−y|ν/2} |ω(z, y)| / (N+1)`.
pub fn entanglement_continuum(profile: &ContinuumProfile, n: usize, nu: usize) -> Result<f64> {
    profile.check_normalized()?;
    let s = strip_integral(profile, n, nu, |w| w.norm())?;
    let pi = std::f64::consts::PI;
    Ok(-pi / 8.0 + pi * nu as f64 / 16.0 * s / (n + 1) as f64)
}

/// Smoothness of the rescaled profile `ζ`, declared by the caller; ordered
/// from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Discontinuous,
    Continuous,
    Differentiable,
    TwiceDifferentiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisFlag {
    /// The declared smoothness is below continuity.
    Discontinuous,
    /// `1 − f` does not extrapolate to zero.
    NoConvergence,
    /// `(1 − f)ν/(αN)` grows over the fitted range.
    EnvelopeViolated,
    /// The superposed components do not become orthogonal.
    NonOrthogonal,
}

type Builder = Arc<dyn Fn(usize) -> Result<ResourceState> + Send + Sync>;
type Scaling = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A `ν`-indexed family of resource states with its declared width scaling
/// `α(ν)`, centre shift `δ(ν)` and smoothness class.
#[derive(Clone)]
pub struct ProfileFamily {
    pub name: String,
    build: Builder,
    alpha: Scaling,
    delta: Scaling,
    pub smoothness: Smoothness,
}

impl fmt::Debug for ProfileFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProfileFamily").field("name", &self.name).field("smoothness", &self.smoothness).finish()
    }
}

impl ProfileFamily {
    pub fn new<B, A, D>(name: impl Into<String>, build: B, alpha: A, delta: D, smoothness: Smoothness) -> Self
    where
        B: Fn(usize) -> Result<ResourceState> + Send + Sync + 'static,
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), build: Arc::new(build), alpha: Arc::new(alpha), delta: Arc::new(delta), smoothness }
    }

    /// `χ(z) = √α ζ((z+δ)α)` sampled at `z_k`.
    pub fn from_zeta<Z, A, D>(name: impl Into<String>, zeta: Z, alpha: A, delta: D, smoothness: Smoothness) -> Self
    where
        Z: Fn(f64) -> f64 + Send + Sync + 'static,
        A: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        D: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    {
        let zeta = Arc::new(zeta);
        let (a, d) = (alpha.clone(), delta.clone());
        let build = move |nu: usize| {
            let (al, de) = (a(nu as f64), d(nu as f64));
            let zeta = zeta.clone();
            ContinuumProfile::pure_real(move |z| al.sqrt() * zeta((z + de) * al)).discretize(nu)
        };
        Self::new(name, build, alpha, delta, smoothness)
    }

    pub fn max_entangled() -> Self {
        Self::new("max_entangled", |nu| Ok(max_entangled(nu)), |_| 1.0, |_| 0.0, Smoothness::TwiceDifferentiable)
    }

    /// Centred Gaussians with `σ = ν^β`; `α = max(1, ν^{1−β})`.
    pub fn gaussian(beta: f64) -> Self {
        Self::new(
            format!("gaussian(beta={beta})"),
            move |nu| gaussian_pure(&GaussianSpec::scaled(nu, beta)),
            move |nu| nu.powf(1.0 - beta).max(1.0),
            |_| 0.0,
            Smoothness::TwiceDifferentiable,
        )
    }

    /// Gaussian of `k`-width `σ` centred at `k₀ = ν(1 − c)/2`, i.e. at imbalance `c`.
    pub fn gaussian_at(center: f64, beta: f64) -> Self {
        Self::new(
            format!("gaussian(center={center}, beta={beta})"),
            move |nu| {
                let k0 = nu as f64 * (1.0 - center) / 2.0;
                gaussian_pure(&GaussianSpec::new(nu, k0, (nu as f64).powf(beta)))
            },
            move |nu| nu.powf(1.0 - beta).max(1.0),
            move |_| -center,
            Smoothness::TwiceDifferentiable,
        )
    }

    pub fn noon() -> Self {
        Self::new("noon", noon, |_| 1.0, |_| 0.0, Smoothness::Discontinuous)
    }

    /// `|k⟩|ν−k⟩` with `k = ⌊fν⌋`.
    pub fn fock(fraction: f64) -> Self {
        Self::new(
            format!("fock(fraction={fraction})"),
            move |nu| fock_separable(nu, ((nu as f64) * fraction).floor() as usize),
            |_| 1.0,
            |_| 0.0,
            Smoothness::Discontinuous,
        )
    }

    pub fn build(&self, nu: usize) -> Result<ResourceState> {
        (self.build)(nu)
    }

    pub fn alpha(&self, nu: usize) -> f64 {
        (self.alpha)(nu as f64)
    }

    pub fn delta(&self, nu: usize) -> f64 {
        (self.delta)(nu as f64)
    }
}

/// Finite-`ν` evidence for or against `f → 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub family: String,
    pub n: usize,
    pub nu_grid: Vec<usize>,
    pub one_minus_f: Vec<f64>,
    /// `1 − E/(πN/8)`.
    pub entanglement_deficit: Vec<f64>,
    /// `(1 − f)ν/N`.
    pub scaled_deficit: Vec<f64>,
    /// Slope of `log(1 − f)` against `log(αN/ν)` over the last half of the grid.
    pub fitted_exponent: f64,
    /// Slope of `1 − f` against `1/ν` over the last half of the grid.
    pub rate_coefficient: f64,
    /// Intercept of the same fit, the extrapolated `1 − f` at `ν = ∞`.
    pub asymptotic_deficit: f64,
    pub converges: bool,
    pub hypothesis_flags: Vec<HypothesisFlag>,
    /// `⟨χ¹|χ²⟩` per grid point for superpositions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlaps: Option<Vec<f64>>,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn check_grid(nu_grid: &[usize], n: usize) -> Result<()> {
    if nu_grid.len() < 4 {
        return Err(Error::InvalidArgument(format!("convergence grid needs at least 4 points, got {}", nu_grid.len())));
    }
    if nu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("convergence grid must be strictly increasing".into()));
    }
    if n == 0 || nu_grid[0] < n {
        return Err(Error::InvalidArgument(format!("grid must start at nu >= N >= 1, got N={n}, nu={}", nu_grid[0])));
    }
    Ok(())
}

pub(crate) fn convergence_from_states(
    family: String,
    n: usize,
    nu_grid: &[usize],
    alpha: &dyn Fn(usize) -> f64,
    smoothness: Smoothness,
    states: &[ResourceState],
) -> Result<ConvergenceReport> {
    let nf = n as f64;
    let mut one_minus_f = Vec::with_capacity(states.len());
    let mut entanglement_deficit = Vec::with_capacity(states.len());
    for rho in states {
        one_minus_f.push(1.0 - fidelity_closed(rho, n)?);
        entanglement_deficit.push(1.0 - avg_entanglement_closed(rho, n)? / max_avg_entanglement(n));
    }
    let scaled_deficit: Vec<f64> = nu_grid.iter().zip(&one_minus_f).map(|(&nu, d)| d * nu as f64 / nf).collect();

    let tail = nu_grid.len() / 2;
    let tail_nu = &nu_grid[tail..];
    let tail_d = &one_minus_f[tail..];
    let log_x: Vec<f64> = tail_nu.iter().map(|&nu| (alpha(nu) * nf / nu as f64).ln()).collect();
    let log_y: Vec<f64> = tail_d.iter().map(|d| d.max(f64::MIN_POSITIVE).ln()).collect();
    let (fitted_exponent, _) = least_squares(&log_x, &log_y);
    let inv: Vec<f64> = tail_nu.iter().map(|&nu| 1.0 / nu as f64).collect();
    let (rate_coefficient, asymptotic_deficit) = least_squares(&inv, tail_d);

    let log_nu: Vec<f64> = tail_nu.iter().map(|&nu| (nu as f64).ln()).collect();
    let (decay, _) = least_squares(&log_nu, &log_y);
    let decreasing = tail_d.windows(2).all(|w| w[1] < w[0]);
    let converges = decreasing && decay < -MIN_DECAY_EXPONENT;

    let mut hypothesis_flags = Vec::new();
    if smoothness == Smoothness::Discontinuous {
        hypothesis_flags.push(HypothesisFlag::Discontinuous);
    }
    if !converges {
        hypothesis_flags.push(HypothesisFlag::NoConvergence);
    }
    if smoothness == Smoothness::TwiceDifferentiable {
        let ratio: Vec<f64> =
            tail_nu.iter().zip(tail_d).map(|(&nu, d)| d * nu as f64 / (alpha(nu) * nf)).collect();
        if ratio.last().expect("non-empty tail") > &(1.25 * ratio[0]) {
            hypothesis_flags.push(HypothesisFlag::EnvelopeViolated);
        }
    }

    Ok(ConvergenceReport {
        family,
        n,
        nu_grid: nu_grid.to_vec(),
        one_minus_f,
        entanglement_deficit,
        scaled_deficit,
        fitted_exponent,
        rate_coefficient,
        asymptotic_deficit,
        converges,
        hypothesis_flags,
        overlaps: None,
    })
}

/// Evaluates the discrete fidelity of a family along `ν_grid` and fits the
/// approach of `f` to one.
pub fn check_family_convergence(family: &ProfileFamily, n: usize, nu_grid: &[usize]) -> Result<ConvergenceReport> {
    check_grid(nu_grid, n)?;
    let states = nu_grid.iter().map(|&nu| family.build(nu)).collect::<Result<Vec<_>>>()?;
    convergence_from_states(family.name.clone(), n, nu_grid, &|nu| family.alpha(nu), family.smoothness, &states)
}

fn nonnegative_amplitudes(rho: &ResourceState, name: &str) -> Result<nalgebra::DVector<f64>> {
    let x = rho
        .pure_amplitudes()
        .ok_or_else(|| Error::Hypothesis(format!("{name} is not a pure state")))?;
    if x.iter().any(|c| c.re < -1e-14 || c.im.abs() > 1e-14) {
        return Err(Error::Hypothesis(format!("{name} has coefficients that are not non-negative")));
    }
    Ok(x.map(|c| c.re.max(0.0)))
}

/// Superposes two non-negative pure families as `c₁|χ¹⟩ + c₂|χ²⟩`
/// (renormalized) and checks that the components become orthogonal and the
/// superposition's fidelity tends to one.
pub fn check_superposition_convergence(
    a: &ProfileFamily,
    b: &ProfileFamily,
    c1: f64,
    c2: f64,
    nu_grid: &[usize],
    n: usize,
) -> Result<ConvergenceReport> {
    check_grid(nu_grid, n)?;
    if c1 < 0.0 || c2 < 0.0 || !(c1 + c2 > 0.0) {
        return Err(Error::Hypothesis(format!("superposition coefficients must be non-negative, got {c1}, {c2}")));
    }
    let mut states = Vec::with_capacity(nu_grid.len());
    let mut overlaps = Vec::with_capacity(nu_grid.len());
    for &nu in nu_grid {
        let xa = nonnegative_amplitudes(&a.build(nu)?, &a.name)?;
        let xb = nonnegative_amplitudes(&b.build(nu)?, &b.name)?;
        overlaps.push(xa.dot(&xb));
        let sum = (xa * c1 + xb * c2).map(|v| C64::new(v, 0.0));
        states.push(ResourceState::pure_unnormalized(sum)?);
    }
    let smoothness = a.smoothness.min(b.smoothness);
    let alpha = |nu: usize| a.alpha(nu).max(b.alpha(nu));
    let name = format!("{c1}*{} + {c2}*{}", a.name, b.name);
    let mut rep = convergence_from_states(name, n, nu_grid, &alpha, smoothness, &states)?;
    let mixed = c1 > 0.0 && c2 > 0.0;
    let last = *overlaps.last().expect("grid is non-empty");
    if mixed && last > 0.1 {
        rep.hypothesis_flags.push(HypothesisFlag::NonOrthogonal);
    }
    rep.overlaps = Some(overlaps);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources::{double_well_ground, BoseHubbardParams};

    fn flat_fidelity(n: usize, nu: usize) -> f64 {
        let a = (n + 1) as f64;
        1.0 - a * a / (3.0 * nu as f64 * (n + 2) as f64)
    }

    fn flat_entanglement(n: usize, nu: usize) -> f64 {
        let a = (n + 1) as f64;
        let pi = std::f64::consts::PI;
        pi * n as f64 / 8.0 - pi * a * a / (24.0 * nu as f64)
    }

    #[test]
    fn flat_profile_matches_its_closed_form() {
        let flat = ContinuumProfile::flat();
        for (n, nu) in [(1, 100), (2, 250), (3, 40), (1, 5000)] {
            let f = fidelity_continuum(&flat, n, nu).unwrap();
            let e = entanglement_continuum(&flat, n, nu).unwrap();
            assert!((f - flat_fidelity(n, nu)).abs() < 1e-9, "N={n} nu={nu}: {f}");
            assert!((e - flat_entanglement(n, nu)).abs() < 1e-9, "N={n} nu={nu}: {e}");
        }
    }

    #[test]
    fn flat_profile_within_envelope_of_discrete_state() {
        let flat = ContinuumProfile::flat();
        for nu in [200, 400, 1000] {
            for n in [1, 2, 3] {
                let f = fidelity_continuum(&flat, n, nu).unwrap();
                let exact = fidelity_closed(&max_entangled(nu), n).unwrap();
                assert!((f - exact).abs() < 10.0 / nu as f64);
            }
        }
    }

    #[test]
    fn gaussian_profile_tracks_repulsive_ground_state() {
        let (nu, gamma) = (400, 10.0);
        let profile = ContinuumProfile::double_well(nu, gamma).unwrap().normalized().unwrap();
        let f = fidelity_continuum(&profile, 2, nu).unwrap();
        let rho = double_well_ground(&BoseHubbardParams::from_gamma(nu, 1.0, gamma)).unwrap();
        let exact = fidelity_closed(&rho, 2).unwrap();
        assert!((f / exact - 1.0).abs() < 0.01, "{f} vs {exact}");
        assert!((f - exact).abs() < 10.0 / nu as f64);
    }

    #[test]
    fn shifting_the_centre_leaves_fidelity_unchanged() {
        let nu = 800;
        let var = 1.0 / nu as f64;
        let base = fidelity_continuum(&ContinuumProfile::gaussian(0.0, var), 2, nu).unwrap();
        for c in [-0.4, 0.25, 0.6] {
            let shifted = fidelity_continuum(&ContinuumProfile::gaussian(c, var), 2, nu).unwrap();
            assert!((shifted - base).abs() < 1e-9, "{shifted} vs {base}");
        }
    }

    #[test]
    fn diagonal_only_density_gives_the_baseline() {
        let diag = ContinuumProfile::density(|z, y| C64::new(if z == y { 0.5 } else { 0.0 }, 0.0));
        diag.check_normalized().unwrap();
        let f = fidelity_continuum(&diag, 2, 100).unwrap();
        assert!((f - 0.25).abs() < 1e-12);
        let rep = check_family_convergence(&ProfileFamily::fock(0.5), 2, &[50, 100, 200, 400]).unwrap();
        assert!(rep.hypothesis_flags.contains(&HypothesisFlag::Discontinuous));
        assert!(rep.hypothesis_flags.contains(&HypothesisFlag::NoConvergence));
    }

    #[test]
    fn unnormalized_profile_is_rejected() {
        let p = ContinuumProfile::pure_real(|_| 1.0);
        assert!(fidelity_continuum(&p, 1, 10).is_err());
        let q = p.normalized().unwrap();
        assert!((fidelity_continuum(&q, 1, 100).unwrap() - flat_fidelity(1, 100)).abs() < 1e-9);
    }

    #[test]
    fn factorized_profile_matches_equivalent_density() {
        let alpha = 3.0;
        let fact = ContinuumProfile::factorized(|s| 0.5 * (1.0 + 0.2 * s), move |d| (-d * d).exp(), alpha)
            .normalized()
            .unwrap();
        let dens = ContinuumProfile::density(move |z, y| {
            C64::new(0.5 * (1.0 + 0.2 * (z + y)) * (-(alpha * (z - y)).powi(2)).exp(), 0.0)
        })
        .normalized()
        .unwrap();
        for nu in [20, 300] {
            let a = fidelity_continuum(&fact, 2, nu).unwrap();
            let b = fidelity_continuum(&dens, 2, nu).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn maximally_entangled_family_rate() {
        let grid = [50, 100, 200, 400, 800, 1600, 3200];
        for n in [1, 2] {
            let rep = check_family_convergence(&ProfileFamily::max_entangled(), n, &grid).unwrap();
            assert!((rep.rate_coefficient / (n as f64 / 3.0) - 1.0).abs() < 0.05);
            assert!(rep.converges);
            assert!(rep.hypothesis_flags.is_empty(), "{:?}", rep.hypothesis_flags);
            assert!((rep.fitted_exponent - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn noon_family_is_flagged() {
        let rep = check_family_convergence(&ProfileFamily::noon(), 1, &[10, 20, 40, 80]).unwrap();
        assert!(!rep.converges);
        assert!(rep.hypothesis_flags.contains(&HypothesisFlag::Discontinuous));
    }

    #[test]
    fn sub_linear_gaussian_deficit_vanishes() {
        let rep = check_family_convergence(&ProfileFamily::gaussian(0.75), 2, &[250, 500, 1000, 2000, 4000]).unwrap();
        assert!(rep.scaled_deficit.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.converges);
        assert!(!rep.hypothesis_flags.contains(&HypothesisFlag::EnvelopeViolated));
    }

    #[test]
    fn grid_validation() {
        let f = ProfileFamily::max_entangled();
        assert!(check_family_convergence(&f, 1, &[10, 20, 30]).is_err());
        assert!(check_family_convergence(&f, 1, &[10, 20, 20, 40]).is_err());
    }

    #[test]
    fn separated_gaussians_superpose_to_perfect_teleportation() {
        let z0 = 3f64.sqrt() / 2.0;
        let a = ProfileFamily::gaussian_at(-z0, 0.5);
        let b = ProfileFamily::gaussian_at(z0, 0.5);
        let grid = [100, 200, 400, 800, 1600];
        let rep = check_superposition_convergence(&a, &b, 1.0, 1.0, &grid, 1).unwrap();
        assert!(rep.converges);
        assert!(rep.overlaps.as_ref().unwrap().last().unwrap() < &1e-6);
        assert!(!rep.hypothesis_flags.contains(&HypothesisFlag::NonOrthogonal));

        let single = check_superposition_convergence(&a, &b, 1.0, 0.0, &grid, 1).unwrap();
        let direct = check_family_convergence(&a, 1, &grid).unwrap();
        for (x, y) in single.one_minus_f.iter().zip(&direct.one_minus_f) {
            assert!((x - y).abs() < 1e-12);
        }

        let same = check_superposition_convergence(&a, &a, 1.0, 1.0, &grid, 1).unwrap();
        assert!(same.hypothesis_flags.contains(&HypothesisFlag::NonOrthogonal));

        assert!(matches!(check_superposition_convergence(&a, &b, 1.0, -0.5, &grid, 1), Err(Error::Hypothesis(_))));
        let alternating = ProfileFamily::new(
            "alternating",
            |nu| Ok(crate::resources::apply_phases(&max_entangled(nu), |k| std::f64::consts::PI * k as f64)),
            |_| 1.0,
            |_| 0.0,
            Smoothness::Discontinuous,
        );
        assert!(matches!(check_superposition_convergence(&a, &alternating, 1.0, 1.0, &grid, 1), Err(Error::Hypothesis(_))));
    }
}
