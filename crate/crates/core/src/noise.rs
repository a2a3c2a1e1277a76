//! Noise acting on the resource before it is used: probabilistic mixing,
//! local dephasing and particle loss, with the robustness checks built on
//! the closed-form fidelity.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::continuum::{convergence_from_states, fidelity_continuum, ContinuumProfile, ConvergenceReport, Smoothness};
use crate::error::{Error, Result};
use crate::fock::{negativity, ResourceState, TwoModeDensityMatrix, C64};
use crate::ode::{self, OdeTolerance};
use crate::protocol::{avg_entanglement_closed, fidelity_closed, separable_fidelity};
use crate::resources::{gaussian_pure, GaussianSpec};

fn check_rate(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} must be finite and non-negative, got {v}")));
    }
    Ok(())
}

/// `(ρ + sσ)/(1 + s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingSpec {
    pub undesired: ResourceState,
    pub weight: f64,
}

pub fn mix(rho: &ResourceState, spec: &MixingSpec) -> Result<ResourceState> {
    check_rate("mixing weight", spec.weight)?;
    rho.check_same_size(&spec.undesired)?;
    if spec.weight == 0.0 {
        return Ok(rho.clone());
    }
    let s = spec.weight;
    let m = (rho.to_matrix() + spec.undesired.to_matrix() * C64::new(s, 0.0)) / C64::new(1.0 + s, 0.0);
    Ok(ResourceState::from_matrix_unchecked(m))
}

/// Local dephasing of both modes at rates `λ₃`, `λ₄` for a time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingSpec {
    pub lambda3: f64,
    pub lambda4: f64,
    #[serde(default)]
    pub t: f64,
}

impl DephasingSpec {
    pub fn validate(&self) -> Result<()> {
        check_rate("lambda3", self.lambda3)?;
        check_rate("lambda4", self.lambda4)?;
        check_rate("t", self.t)
    }

    /// `(t/2)(λ₃ + λ₄)`, the coefficient of `(k−j)²` in the damping exponent.
    pub fn exponent(&self) -> f64 {
        0.5 * self.t * (self.lambda3 + self.lambda4)
    }
}

/// `ρ_{k,j} → e^{−(t/2)(λ₃+λ₄)(k−j)²} ρ_{k,j}`. Pure and already dephased
/// states keep the damping in log-space, preserving the ratios between
/// strongly damped coherences.
pub fn dephase(rho: &ResourceState, spec: &DephasingSpec) -> Result<ResourceState> {
    spec.validate()?;
    let g = spec.exponent();
    if g == 0.0 {
        return Ok(rho.clone());
    }
    let dim = rho.dim();
    let extra = |d: usize| -g * (d * d) as f64;
    if let Some(x) = rho.pure_amplitudes() {
        return Ok(ResourceState::damped(x.clone(), (0..dim).map(extra).collect()));
    }
    if let Some((x, logc)) = rho.damped_parts() {
        let logc = logc.iter().enumerate().map(|(d, l)| l + extra(d)).collect();
        return Ok(ResourceState::damped(x.clone(), logc));
    }
    let m = rho.dense().expect("remaining representation is dense");
    let damped = DMatrix::from_fn(dim, dim, |k, j| m[(k, j)] * extra(k.abs_diff(j)).exp());
    Ok(ResourceState::from_matrix_unchecked(damped))
}

/// Entries of the block state
/// `[[a,0,0,y],[0,b,x,0],[0,x,c,0],[y,0,0,d]]` padded with zeros to `ν+1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub x: f64,
    pub y: f64,
}

impl ThresholdState {
    pub fn validate(&self) -> Result<()> {
        let ThresholdState { a, b, c, d, x, y } = *self;
        if [a, b, c, d].iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidState("populations must be non-negative".into()));
        }
        if ((a + b + c + d) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("a+b+c+d = {}, expected 1", a + b + c + d)));
        }
        if !(x < 0.0 && y > 0.0) {
            return Err(Error::InvalidArgument(format!("need x < 0 < y, got x={x}, y={y}")));
        }
        if x * x > b * c || y * y > a * d {
            return Err(Error::InvalidState("coherences violate x² <= bc or y² <= ad".into()));
        }
        Ok(())
    }

    pub fn build(&self, nu: usize) -> Result<ResourceState> {
        self.validate()?;
        if nu < 3 {
            return Err(Error::InvalidArgument(format!("the block state needs nu >= 3, got {nu}")));
        }
        let mut m = DMatrix::zeros(nu + 1, nu + 1);
        let r = |v: f64| C64::new(v, 0.0);
        m[(0, 0)] = r(self.a);
        m[(1, 1)] = r(self.b);
        m[(2, 2)] = r(self.c);
        m[(3, 3)] = r(self.d);
        m[(1, 2)] = r(self.x);
        m[(2, 1)] = r(self.x);
        m[(0, 3)] = r(self.y);
        m[(3, 0)] = r(self.y);
        ResourceState::from_matrix(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: usize,
    pub nu: usize,
    pub separable_fidelity: f64,
    pub fidelity_at_zero: f64,
    /// `−xN/(N−2)`; the undamped state beats separable resources iff `y` exceeds it.
    pub y_threshold: f64,
    /// `ln(−y(N−2)/(xN)) / (4(λ₃+λ₄))`.
    pub critical_time: f64,
    /// Root of `f(t) − f_sep` located by bisection when `critical_time > 0`.
    pub critical_time_bisection: Option<f64>,
}

/// Time after which the dephased block state stops beating separable
/// resources at `N > 2`. The state is padded to `max(ν, N, 3)` particles.
pub fn dephasing_threshold_demo(
    state: &ThresholdState,
    n: usize,
    lambda3: f64,
    lambda4: f64,
    nu: usize,
) -> Result<ThresholdReport> {
    if n <= 2 {
        return Err(Error::Unsupported(format!("the dephasing threshold needs N > 2, got N={n}")));
    }
    check_rate("lambda3", lambda3)?;
    check_rate("lambda4", lambda4)?;
    let rates = lambda3 + lambda4;
    if rates == 0.0 {
        return Err(Error::InvalidArgument("dephasing rates must not both vanish".into()));
    }
    let nu = nu.max(n).max(3);
    let rho = state.build(nu)?;
    let nf = n as f64;
    let f_sep = separable_fidelity(n);
    let excess = |t: f64| -> Result<f64> {
        let spec = DephasingSpec { lambda3, lambda4, t };
        Ok(fidelity_closed(&dephase(&rho, &spec)?, n)? - f_sep)
    };
    let critical_time = (-state.y * (nf - 2.0) / (state.x * nf)).ln() / (4.0 * rates);
    let bisection = if critical_time > 0.0 {
        let (mut lo, mut hi) = (0.0, 1.0 / rates);
        while excess(hi)? > 0.0 {
            hi *= 2.0;
            if hi > 1e6 / rates {
                return Err(Error::Numerical("no fidelity crossing found".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    } else {
        None
    };
    Ok(ThresholdReport {
        n,
        nu,
        separable_fidelity: f_sep,
        fidelity_at_zero: fidelity_closed(&rho, n)?,
        y_threshold: -state.x * nf / (nf - 2.0),
        critical_time,
        critical_time_bisection: bisection,
    })
}

/// A loss channel `A = a₃^m a₄^n` at rate `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    pub rate: f64,
    pub m: usize,
    pub n: usize,
}

fn falling(k: usize, m: usize) -> f64 {
    if k < m {
        0.0
    } else {
        ((k - m + 1)..=k).map(|i| i as f64).product()
    }
}

impl LossChannel {
    pub fn new(rate: f64, m: usize, n: usize) -> Self {
        Self { rate, m, n }
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("loss rate", self.rate)?;
        if self.m + self.n == 0 {
            return Err(Error::InvalidArgument("a loss channel must remove at least one particle".into()));
        }
        Ok(())
    }

    pub fn removed(&self) -> usize {
        self.m + self.n
    }

    /// `⟨k|A†A|k⟩` in the `ν`-particle block.
    pub fn weight(&self, nu: usize, k: usize) -> f64 {
        falling(k, self.m) * falling(nu - k, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub channels: Vec<LossChannel>,
    #[serde(default)]
    pub t: f64,
}

impl LossSpec {
    /// `{a₃, a₄, a₃², a₄², a₃a₄}` with the given rates.
    pub fn two_particle(l3: f64, l4: f64, l33: f64, l44: f64, l34: f64, t: f64) -> Self {
        let channels = vec![
            LossChannel::new(l3, 1, 0),
            LossChannel::new(l4, 0, 1),
            LossChannel::new(l33, 2, 0),
            LossChannel::new(l44, 0, 2),
            LossChannel::new(l34, 1, 1),
        ];
        Self { channels, t }
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("t", self.t)?;
        self.channels.iter().try_for_each(LossChannel::validate)
    }

    pub fn at(&self, t: f64) -> Self {
        Self { channels: self.channels.clone(), t }
    }

    /// `η_k = Σ_i (λ_i/2) k!(ν−k)!/((k−m_i)!(ν−k−n_i)!)`.
    pub fn eta(&self, nu: usize) -> Vec<f64> {
        (0..=nu).map(|k| self.channels.iter().map(|c| 0.5 * c.rate * c.weight(nu, k)).sum()).collect()
    }

    /// `λ₃₃ + λ₄₄ − λ₃₄`, summed over the two-particle channels present.
    pub fn two_particle_width_rate(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| match (c.m, c.n) {
                (2, 0) | (0, 2) => c.rate,
                (1, 1) => -c.rate,
                _ => 0.0,
            })
            .sum()
    }
}

/// An unnormalized `ν′`-particle block reached by losing `ν − ν′` particles.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBlock {
    pub particles: usize,
    pub matrix: DMatrix<C64>,
}

impl LowerBlock {
    pub fn weight(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// The state after loss, `e^{−tη} ρ e^{−tη} ⊕ (lower blocks)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    /// The surviving `ν`-particle block, renormalized.
    pub survivor: ResourceState,
    /// Trace of the surviving block before renormalization.
    pub survival_weight: f64,
    pub lower_blocks: Option<Vec<LowerBlock>>,
}

impl LossResult {
    /// The unnormalized surviving block.
    pub fn surviving_block(&self) -> DMatrix<C64> {
        self.survivor.to_matrix() * C64::new(self.survival_weight, 0.0)
    }

    pub fn total_trace(&self) -> f64 {
        self.survival_weight + self.lower_blocks.iter().flatten().map(LowerBlock::weight).sum::<f64>()
    }

    /// Fidelity of the evolved state; lower blocks carry too few particles
    /// to contribute.
    pub fn fidelity(&self, n: usize) -> Result<f64> {
        Ok(self.survival_weight * fidelity_closed(&self.survivor, n)?)
    }

    /// `(ν′, weight, E)` for each lower block with `ν′ ≥ N` and `ν − ν′ < N`,
    /// evaluated as if the normalized block were the resource on its own.
    pub fn lower_block_entanglement(&self, n: usize) -> Result<Vec<(usize, f64, f64)>> {
        let nu = self.survivor.n_particles();
        let mut out = Vec::new();
        for b in self.lower_blocks.iter().flatten() {
            let w = b.weight();
            if b.particles < n || nu - b.particles >= n || w <= 0.0 {
                continue;
            }
            let rho = ResourceState::from_matrix_unchecked(&b.matrix / C64::new(w, 0.0));
            out.push((b.particles, w, avg_entanglement_closed(&rho, n)?));
        }
        Ok(out)
    }
}

/// Damps `ρ_{k,j}` by `e^{−t(η_k+η_j)}`. Lower blocks, when requested, come
/// from the Lindblad integrator.
pub fn particle_loss_analytic(rho: &ResourceState, spec: &LossSpec, compute_lower: bool) -> Result<LossResult> {
    spec.validate()?;
    let nu = rho.n_particles();
    let decay: Vec<f64> = spec.eta(nu).iter().map(|e| (-spec.t * e).exp()).collect();
    let (survivor, survival_weight) = if let Some(x) = rho.pure_amplitudes() {
        let y = DVector::from_fn(nu + 1, |k, _| x[k] * decay[k]);
        let w = y.norm_squared();
        (ResourceState::pure_unnormalized(y).map_err(|_| underflow())?, w)
    } else if let Some((x, logc)) = rho.damped_parts() {
        let y = DVector::from_fn(nu + 1, |k, _| x[k] * decay[k]);
        let w = y.norm_squared();
        if !(w > 0.0) {
            return Err(underflow());
        }
        (ResourceState::damped(y.unscale(w.sqrt()), logc.to_vec()), w)
    } else {
        let m = rho.dense().expect("remaining representation is dense");
        let s = DMatrix::from_fn(nu + 1, nu + 1, |k, j| m[(k, j)] * (decay[k] * decay[j]));
        let w = s.trace().re;
        if !(w > 0.0) {
            return Err(underflow());
        }
        (ResourceState::from_matrix_unchecked(s / C64::new(w, 0.0)), w)
    };
    let lower_blocks = if compute_lower {
        let dt = if spec.t > 0.0 { spec.t / 16.0 } else { 1.0 };
        particle_loss_lindblad(rho, spec, dt)?.final_state.lower_blocks
    } else {
        None
    };
    Ok(LossResult { survivor, survival_weight, lower_blocks })
}

fn underflow() -> Error {
    Error::Numerical("surviving block underflowed to zero weight".into())
}

/// Output of the Lindblad integration.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTrajectory {
    pub times: Vec<f64>,
    /// Sum of block traces at each output time.
    pub total_trace: Vec<f64>,
    pub final_state: LossResult,
}

struct BlockLayout {
    nu: usize,
    offsets: Vec<usize>,
}

impl BlockLayout {
    fn new(nu: usize) -> Self {
        let mut offsets = Vec::with_capacity(nu + 2);
        let mut acc = 0;
        for p in 0..=nu {
            offsets.push(acc);
            acc += (p + 1) * (p + 1);
        }
        offsets.push(acc);
        Self { nu, offsets }
    }

    fn len(&self) -> usize {
        self.offsets[self.nu + 1]
    }

    fn idx(&self, p: usize, k: usize, j: usize) -> usize {
        self.offsets[p] + k * (p + 1) + j
    }

    fn block(&self, y: &[C64], p: usize) -> DMatrix<C64> {
        DMatrix::from_fn(p + 1, p + 1, |k, j| y[self.idx(p, k, j)])
    }
}

/// Integrates `dρ/dt = Σ_i λ_i (A_i ρ A_i† − ½{A_i†A_i, ρ})` over the direct
/// sum of fixed-particle blocks `0..=ν`, recording every `dt` up to
/// `spec.t`. No trace renormalization is applied.
pub fn particle_loss_lindblad(rho: &ResourceState, spec: &LossSpec, dt: f64) -> Result<LindbladTrajectory> {
    spec.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("output step must be positive, got {dt}")));
    }
    let nu = rho.n_particles();
    let layout = BlockLayout::new(nu);
    let mut y0 = vec![C64::new(0.0, 0.0); layout.len()];
    for k in 0..=nu {
        for j in 0..=nu {
            y0[layout.idx(nu, k, j)] = rho.entry(k, j);
        }
    }
    // per block p and channel: ⟨k|A†A|k⟩ and the jump amplitude ⟨k−m|A|k⟩
    let channels: Vec<LossChannel> = spec.channels.iter().copied().filter(|c| c.rate > 0.0).collect();
    let anti: Vec<Vec<f64>> = (0..=nu)
        .map(|p| (0..=p).map(|k| channels.iter().map(|c| 0.5 * c.rate * c.weight(p, k)).sum()).collect())
        .collect();
    #[allow(clippy::needless_range_loop)]
    let rhs = |y: &[C64], dy: &mut [C64]| {
        for p in 0..=nu {
            for k in 0..=p {
                for j in 0..=p {
                    let i = layout.idx(p, k, j);
                    dy[i] = -y[i] * (anti[p][k] + anti[p][j]);
                }
            }
        }
        for c in &channels {
            let r = c.removed();
            for p in r..=nu {
                let q = p - r;
                for k in c.m..=p - c.n {
                    let ak = c.weight(p, k).sqrt();
                    for j in c.m..=p - c.n {
                        let aj = c.weight(p, j).sqrt();
                        dy[layout.idx(q, k - c.m, j - c.m)] += y[layout.idx(p, k, j)] * (c.rate * ak * aj);
                    }
                }
            }
        }
    };
    let mut times = Vec::new();
    let steps = (spec.t / dt).ceil() as usize;
    for s in 0..=steps {
        times.push((s as f64 * dt).min(spec.t));
    }
    times.dedup();
    let max_rate: f64 = anti.iter().flatten().copied().fold(0.0, f64::max);
    let h0 = if max_rate > 0.0 { (0.1 / max_rate).min(dt) } else { dt };
    let states = ode::integrate(rhs, y0, &times, h0, OdeTolerance::default())?;
    let total_trace: Vec<f64> = states
        .iter()
        .map(|y| (0..=nu).map(|p| (0..=p).map(|k| y[layout.idx(p, k, k)].re).sum::<f64>()).sum())
        .collect();
    let last = states.last().expect("at least one output time");
    let top = layout.block(last, nu);
    let w = top.trace().re;
    if !(w > 0.0) {
        return Err(underflow());
    }
    let lower = (0..nu).rev().map(|p| LowerBlock { particles: p, matrix: layout.block(last, p) }).collect();
    Ok(LindbladTrajectory {
        times,
        total_trace,
        final_state: LossResult {
            survivor: ResourceState::from_matrix_unchecked(top / C64::new(w, 0.0)),
            survival_weight: w,
            lower_blocks: Some(lower),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// `e^{−2t max_k η_k} f(0)`.
    pub lower_bound: Vec<f64>,
    pub bound_holds: Vec<bool>,
    /// Whether every entry with `|k−j| ≤ N` is real and non-negative, which
    /// makes the lower bound a theorem rather than an observation.
    pub bound_guaranteed: bool,
    pub separable_fidelity: f64,
    /// `ln(f(0)(N+2)/2) / (2 max_k η_k)`; below it the bound certifies `f(t) > f_sep`.
    pub critical_time: Option<f64>,
}

/// Tolerance for the bound comparison, absorbing rounding in `f(t)`.
pub const BOUND_TOL: f64 = 1e-12;

pub fn loss_fidelity_bounds(rho: &ResourceState, channels: &[LossChannel], n: usize, times: &[f64]) -> Result<BoundsReport> {
    let spec = LossSpec { channels: channels.to_vec(), t: 0.0 };
    spec.validate()?;
    let nu = rho.n_particles();
    let max_eta = spec.eta(nu).into_iter().fold(0.0, f64::max);
    let f0 = fidelity_closed(rho, n)?;
    let mut fidelity = Vec::with_capacity(times.len());
    let mut lower_bound = Vec::with_capacity(times.len());
    for &t in times {
        fidelity.push(particle_loss_analytic(rho, &spec.at(t), false)?.fidelity(n)?);
        lower_bound.push((-2.0 * t * max_eta).exp() * f0);
    }
    let bound_holds = fidelity.iter().zip(&lower_bound).map(|(f, b)| *f >= b - BOUND_TOL).collect();
    let bound_guaranteed = (0..=nu).all(|k| {
        (k.saturating_sub(n)..=(k + n).min(nu)).all(|j| {
            let e = rho.entry(k, j);
            e.re >= 0.0 && e.im.abs() <= 1e-14
        })
    });
    let f_sep = separable_fidelity(n);
    let budget = (f0 / f_sep).ln();
    let critical_time = (max_eta > 0.0 && budget > 0.0).then(|| budget / (2.0 * max_eta));
    Ok(BoundsReport {
        n,
        times: times.to_vec(),
        fidelity,
        lower_bound,
        bound_holds,
        bound_guaranteed,
        separable_fidelity: f_sep,
        critical_time,
    })
}

/// Noise applied along a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Dephasing { lambda3: f64, lambda4: f64 },
    Loss { channels: Vec<LossChannel> },
}

impl NoiseModel {
    pub fn apply(&self, rho: &ResourceState, t: f64) -> Result<ResourceState> {
        match self {
            Self::Dephasing { lambda3, lambda4 } => dephase(rho, &DephasingSpec { lambda3: *lambda3, lambda4: *lambda4, t }),
            Self::Loss { channels } => Ok(particle_loss_analytic(rho, &LossSpec { channels: channels.clone(), t }, false)?.survivor),
        }
    }

    /// Predicted shift of `α²` at time `t` and size `ν`.
    pub fn alpha2_shift(&self, nu: usize, t: f64) -> f64 {
        let nu2 = (nu * nu) as f64;
        match self {
            Self::Dephasing { lambda3, lambda4 } => t * (lambda3 + lambda4) * nu2 / 8.0,
            Self::Loss { channels } => {
                let spec = LossSpec { channels: channels.clone(), t };
                t * spec.two_particle_width_rate() * nu2 / 16.0
            }
        }
    }

    /// `t(λ₃+λ₄)N²` for dephasing, `t max_k η_k` for loss.
    pub fn criterion(&self, n: usize, nu: usize, t: f64) -> f64 {
        match self {
            Self::Dephasing { lambda3, lambda4 } => t * (lambda3 + lambda4) * (n * n) as f64,
            Self::Loss { channels } => {
                t * LossSpec { channels: channels.clone(), t }.eta(nu).into_iter().fold(0.0, f64::max)
            }
        }
    }

    /// Multiplier `e^{−…}` of `ω(z, y)` in continuum variables.
    fn continuum_factor(&self, nu: usize, t: f64) -> Box<dyn Fn(f64, f64) -> f64 + Send + Sync> {
        let nuf = nu as f64;
        match self {
            Self::Dephasing { lambda3, lambda4 } => {
                let g = t * (lambda3 + lambda4) * nuf * nuf / 8.0;
                Box::new(move |z, y| (-g * (z - y) * (z - y)).exp())
            }
            Self::Loss { channels } => {
                let channels = channels.clone();
                // η as a polynomial in the continuous occupation k = ν(1−z)/2
                let eta = move |z: f64| -> f64 {
                    let k = nuf * (1.0 - z) / 2.0;
                    let r = nuf - k;
                    let ff = |x: f64, m: usize| (0..m).map(|i| (x - i as f64).max(0.0)).product::<f64>();
                    channels.iter().map(|c| 0.5 * c.rate * ff(k, c.m) * ff(r, c.n)).sum()
                };
                Box::new(move |z, y| (-t * (eta(z) + eta(y))).exp())
            }
        }
    }
}

/// `t(ν) = coefficient · ν^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeScaling {
    pub coefficient: f64,
    #[serde(default)]
    pub exponent: f64,
}

impl TimeScaling {
    pub fn at(&self, nu: usize) -> f64 {
        self.coefficient * (nu as f64).powf(self.exponent)
    }
}

/// Centred pure Gaussians with `k`-width `σ = ν^β`, whose continuum form
/// is `ω₊(z+y) e^{−α²(z−y)²}` with `α² = ν²/(32σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFamily {
    pub beta: f64,
}

impl GaussianFamily {
    pub fn spec(&self, nu: usize) -> GaussianSpec {
        GaussianSpec::scaled(nu, self.beta)
    }

    pub fn alpha2(&self, nu: usize) -> f64 {
        let s = self.spec(nu).width;
        (nu * nu) as f64 / (32.0 * s * s)
    }

    /// `χ(z)` with `z`-variance `(2σ/ν)²`.
    pub fn profile(&self, nu: usize) -> ContinuumProfile {
        let s = 2.0 * self.spec(nu).width / nu as f64;
        ContinuumProfile::gaussian(0.0, s * s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyConvergenceReport {
    /// Fits on the noisy states.
    pub convergence: ConvergenceReport,
    pub times: Vec<f64>,
    pub alpha2_clean: Vec<f64>,
    /// `−ln(ρ_{m+d,m−d}/ρ_{m,m})·ν²/(16d²)` at the centre of the noisy state.
    pub alpha2_measured: Vec<f64>,
    pub alpha2_predicted: Vec<f64>,
    /// Largest relative deviation of the measured from the predicted `α²`.
    pub substitution_error: f64,
    /// Continuum fidelity of the noisy profile.
    pub fidelity_continuum: Vec<f64>,
    pub criterion: Vec<f64>,
    /// Whether `Δα²` is independent of `d` in every noisy state.
    pub factorized: bool,
}

/// Sweeps a Gaussian family under noise with a `ν`-dependent time and checks
/// that the noise acts as `α² → α² + Δα²` on the factorized form.
pub fn noisy_convergence(
    family: &GaussianFamily,
    noise: &NoiseModel,
    time: TimeScaling,
    n: usize,
    nu_grid: &[usize],
) -> Result<NoisyConvergenceReport> {
    let mut states = Vec::with_capacity(nu_grid.len());
    let mut times = Vec::new();
    let (mut clean, mut measured, mut predicted, mut cont, mut crit) = (vec![], vec![], vec![], vec![], vec![]);
    let mut factorized = true;
    let mut substitution_error = 0.0f64;
    for &nu in nu_grid {
        if nu % 2 != 0 || nu < 8 {
            return Err(Error::InvalidArgument(format!("noisy convergence needs even nu >= 8, got {nu}")));
        }
        let t = time.at(nu);
        check_rate("t", t)?;
        let noisy = noise.apply(&gaussian_pure(&family.spec(nu))?, t)?;
        let m = nu / 2;
        let centre = noisy.entry(m, m).re;
        let probe = |d: usize| -> f64 {
            let ratio = noisy.entry(m + d, m - d).re / centre;
            -ratio.ln() * (nu * nu) as f64 / (16.0 * (d * d) as f64)
        };
        let a2 = family.alpha2(nu);
        let est: Vec<f64> = (1..=3).map(probe).collect();
        let pred = a2 + noise.alpha2_shift(nu, t);
        for e in &est {
            if !e.is_finite() {
                return Err(Error::Numerical(format!("coherences underflowed at nu={nu}")));
            }
            substitution_error = substitution_error.max(((e - pred) / pred).abs());
        }
        let spread = est.iter().copied().fold(f64::NEG_INFINITY, f64::max) - est.iter().copied().fold(f64::INFINITY, f64::min);
        if spread > 1e-6 * pred.abs().max(1.0) {
            factorized = false;
        }
        let base = family.profile(nu);
        let factor = noise.continuum_factor(nu, t);
        let profile = ContinuumProfile::density(move |z, y| base.omega(z, y) * factor(z, y)).normalized()?;
        cont.push(fidelity_continuum(&profile, n, nu)?);
        crit.push(noise.criterion(n, nu, t));
        clean.push(a2);
        measured.push(est[0]);
        predicted.push(pred);
        times.push(t);
        states.push(noisy);
    }
    let convergence = convergence_from_states(
        format!("gaussian(beta={}) under {noise:?}", family.beta),
        n,
        nu_grid,
        &|nu| (nu as f64).powf(1.0 - family.beta).max(1.0),
        Smoothness::TwiceDifferentiable,
        &states,
    )?;
    Ok(NoisyConvergenceReport {
        convergence,
        times,
        alpha2_clean: clean,
        alpha2_measured: measured,
        alpha2_predicted: predicted,
        substitution_error,
        fidelity_continuum: cont,
        criterion: crit,
        factorized,
    })
}

/// `E(t)` of a dephased resource, for scans over time.
pub fn dephased_performance(rho: &ResourceState, spec: &DephasingSpec, n: usize) -> Result<(f64, f64)> {
    let out = dephase(rho, spec)?;
    Ok((fidelity_closed(&out, n)?, avg_entanglement_closed(&out, n)?))
}

/// Negativity of a normalized lower block, as a convenience for reports.
pub fn block_negativity(block: &LowerBlock) -> f64 {
    let w = block.weight();
    if w <= 0.0 {
        return 0.0;
    }
    negativity(&TwoModeDensityMatrix::from_matrix_unchecked(&block.matrix / C64::new(w, 0.0)))
}
