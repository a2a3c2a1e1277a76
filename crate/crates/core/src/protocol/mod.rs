//! Teleportation of one mode of a two-mode `N`-particle state through a
//! two-mode `ν`-particle resource.
//!
//! Alice measures modes 2 and 3 in the basis `|φ^{(l,λ)}⟩`, Bob relabels
//! mode 4 with `V₄^{(l,λ)}`, and the teleported state lives on modes 1 and 4.
//! Every per-outcome quantity here uses the collapsed index form
//! `p ρ14 = Σ_{k,j} ρ_{k+l,j+l} c_k c̄_j / C_l |k⟩⟨j| ⊗ |N−k⟩⟨N−j|`; the
//! explicit four-mode contraction lives in [`crate::oracle`].

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{PureTwoModeState, ResourceState, TwoModeDensityMatrix, C64};

mod montecarlo;
pub use montecarlo::{avg_entanglement_monte_carlo, fidelity_monte_carlo, Estimate, MonteCarloSettings};

/// Tolerance on the imaginary residue of the closed-form sums.
pub const REAL_RESIDUE_TOL: f64 = 1e-10;

/// A measurement outcome `(l, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Outcome {
    pub l: i64,
    pub lambda: usize,
}

/// Alice's complete projective measurement on modes 2 and 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementBasis {
    n: usize,
    nu: usize,
}

impl MeasurementBasis {
    /// Requires `N ≥ 1` and `ν ≥ N`; the multiplicity table is only defined there.
    pub fn new(n: usize, nu: usize) -> Result<Self> {
        check_regime(n, nu)?;
        Ok(Self { n, nu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Sector labels `l = −N..=ν`.
    pub fn sectors(&self) -> RangeInclusive<i64> {
        -(self.n as i64)..=self.nu as i64
    }

    /// Values of `k` summed over in sector `l`: `max{0,−l} ..= min{N, ν−l}`.
    pub fn k_range(&self, l: i64) -> RangeInclusive<usize> {
        let lo = (-l).max(0) as usize;
        let hi = (self.n as i64).min(self.nu as i64 - l) as usize;
        lo..=hi
    }

    /// `C_l`, the number of phase labels in sector `l`.
    pub fn multiplicity(&self, l: i64) -> usize {
        let r = self.k_range(l);
        r.end() - r.start() + 1
    }

    pub fn outcomes(&self) -> impl Iterator<Item = Outcome> + '_ {
        self.sectors().flat_map(move |l| (0..self.multiplicity(l)).map(move |lambda| Outcome { l, lambda }))
    }

    pub fn len(&self) -> usize {
        (self.n + 1) * (self.nu + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn check(&self, outcome: Outcome) -> Result<usize> {
        if !self.sectors().contains(&outcome.l) {
            return Err(Error::InvalidArgument(format!(
                "sector l={} outside [-{}, {}]",
                outcome.l, self.n, self.nu
            )));
        }
        let c = self.multiplicity(outcome.l);
        if outcome.lambda >= c {
            return Err(Error::InvalidArgument(format!(
                "phase label {} outside [0, {}) for l={}",
                outcome.lambda, c, outcome.l
            )));
        }
        Ok(c)
    }

    fn phase(&self, outcome: Outcome, k: usize) -> C64 {
        let c = self.multiplicity(outcome.l) as f64;
        C64::from_polar(1.0, 2.0 * PI * (outcome.lambda * k) as f64 / c)
    }

    /// `⟨N−k|₂⟨k+l|₃ φ^{(l,λ)}⟩`, zero for `k` outside the sector.
    pub fn amplitude(&self, outcome: Outcome, k: usize) -> C64 {
        if !self.k_range(outcome.l).contains(&k) {
            return C64::new(0.0, 0.0);
        }
        let c = self.multiplicity(outcome.l) as f64;
        self.phase(outcome, k) / c.sqrt()
    }

    /// `|φ^{(l,λ)}⟩` in the product basis of modes 2 and 3, index `n₂·(ν+1) + n₃`.
    pub fn product_vector(&self, outcome: Outcome) -> DVector<C64> {
        let d3 = self.nu + 1;
        let mut v = DVector::zeros((self.n + 1) * d3);
        for k in self.k_range(outcome.l) {
            let n3 = (k as i64 + outcome.l) as usize;
            v[(self.n - k) * d3 + n3] = self.amplitude(outcome, k);
        }
        v
    }

    /// Bob's operator `V₄^{(l,λ)} = Σ_k e^{2πiλk/C_l} |N−k⟩⟨ν−k−l|` on mode 4,
    /// as a `(ν+1)×(ν+1)` matrix with rows indexing the output occupation.
    pub fn bob_isometry(&self, outcome: Outcome) -> Result<DMatrix<C64>> {
        self.check(outcome)?;
        let mut v = DMatrix::zeros(self.nu + 1, self.nu + 1);
        for k in self.k_range(outcome.l) {
            let input = (self.nu as i64 - k as i64 - outcome.l) as usize;
            v[(self.n - k, input)] = self.phase(outcome, k);
        }
        Ok(v)
    }
}

fn check_regime(n: usize, nu: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("the teleported state needs N >= 1 particles".into()));
    }
    if nu < n {
        return Err(Error::Unsupported(format!(
            "resource with nu={nu} < N={n}: the measurement multiplicities are only defined for nu >= N"
        )));
    }
    Ok(())
}

/// `V₄^{(l,λ)}` for the given labels.
pub fn bob_isometry(n: usize, nu: usize, l: i64, lambda: usize) -> Result<DMatrix<C64>> {
    MeasurementBasis::new(n, nu)?.bob_isometry(Outcome { l, lambda })
}

/// Probability `p_{(l,λ)}` and conditional state `ρ14^{(l,λ)}` of one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportOutcome {
    pub outcome: Outcome,
    pub probability: f64,
    /// `None` for outcomes that occur with probability zero.
    pub state: Option<TwoModeDensityMatrix>,
}

impl TeleportOutcome {
    pub fn negativity(&self) -> f64 {
        self.state.as_ref().map_or(0.0, crate::fock::negativity)
    }

    /// `⟨ψ|ρ14|ψ⟩`, zero for null outcomes.
    pub fn conditional_fidelity(&self, psi: &PureTwoModeState) -> Result<f64> {
        self.state.as_ref().map_or(Ok(0.0), |s| s.overlap(psi))
    }
}

fn check_inputs(psi: &PureTwoModeState, rho: &ResourceState) -> Result<MeasurementBasis> {
    MeasurementBasis::new(psi.n_particles(), rho.n_particles())
}

/// `p ρ14` for sector `l` (identical for every λ).
fn sector_block(basis: &MeasurementBasis, psi: &PureTwoModeState, rho: &ResourceState, l: i64) -> DMatrix<C64> {
    let n = basis.n();
    let c = basis.multiplicity(l) as f64;
    let range = basis.k_range(l);
    let mut block = DMatrix::zeros(n + 1, n + 1);
    for k in range.clone() {
        let rk = (k as i64 + l) as usize;
        for j in range.clone() {
            let rj = (j as i64 + l) as usize;
            block[(k, j)] = rho.entry(rk, rj) * psi.amplitude(k) * psi.amplitude(j).conj() / c;
        }
    }
    block
}

fn outcome_from_block(outcome: Outcome, block: DMatrix<C64>) -> TeleportOutcome {
    let p = block.trace().re.max(0.0);
    let state = (p > 0.0).then(|| TwoModeDensityMatrix::from_matrix_unchecked(block / C64::new(p, 0.0)));
    TeleportOutcome { outcome, probability: p, state }
}

/// The outcome `(l, λ)` of teleporting `ψ` with resource `ρ`.
pub fn teleport_outcome(psi: &PureTwoModeState, rho: &ResourceState, l: i64, lambda: usize) -> Result<TeleportOutcome> {
    let basis = check_inputs(psi, rho)?;
    let outcome = Outcome { l, lambda };
    basis.check(outcome)?;
    Ok(outcome_from_block(outcome, sector_block(&basis, psi, rho, l)))
}

/// All `(N+1)(ν+1)` outcomes in sector-major order.
pub fn teleport_all(psi: &PureTwoModeState, rho: &ResourceState) -> Result<Vec<TeleportOutcome>> {
    let basis = check_inputs(psi, rho)?;
    let mut out = Vec::with_capacity(basis.len());
    for l in basis.sectors() {
        let template = outcome_from_block(Outcome { l, lambda: 0 }, sector_block(&basis, psi, rho, l));
        for lambda in 0..basis.multiplicity(l) {
            let mut o = template.clone();
            o.outcome.lambda = lambda;
            out.push(o);
        }
    }
    Ok(out)
}

/// `T[|ψ⟩⟨ψ|] = Σ_{l,λ} p_{(l,λ)} ρ14^{(l,λ)}`, accumulated outcome by outcome.
pub fn average_teleported(psi: &PureTwoModeState, rho: &ResourceState) -> Result<TwoModeDensityMatrix> {
    let n = psi.n_particles();
    let mut acc = DMatrix::zeros(n + 1, n + 1);
    for o in teleport_all(psi, rho)? {
        if let Some(s) = &o.state {
            acc += s.matrix() * C64::new(o.probability, 0.0);
        }
    }
    Ok(TwoModeDensityMatrix::from_matrix_unchecked(acc))
}

/// `T[|ψ⟩⟨ψ|] = Σ_l Σ_{k,j} c_k c̄_j ρ_{k+l,j+l} |k⟩⟨j| ⊗ |N−k⟩⟨N−j|`, the
/// λ-sum already carried out.
pub fn average_teleported_closed(psi: &PureTwoModeState, rho: &ResourceState) -> Result<TwoModeDensityMatrix> {
    let basis = check_inputs(psi, rho)?;
    let n = basis.n();
    let mut acc = DMatrix::zeros(n + 1, n + 1);
    for (k, j) in (0..=n).flat_map(|k| (0..=n).map(move |j| (k, j))) {
        let weight = psi.amplitude(k) * psi.amplitude(j).conj();
        let mut s = C64::new(0.0, 0.0);
        // sectors where both k and j are admissible: −min(k,j) ≤ l ≤ ν − max(k,j)
        let lo = -(k.min(j) as i64);
        let hi = basis.nu() as i64 - k.max(j) as i64;
        for l in lo..=hi {
            s += rho.entry((k as i64 + l) as usize, (j as i64 + l) as usize);
        }
        acc[(k, j)] = weight * s;
    }
    Ok(TwoModeDensityMatrix::from_matrix_unchecked(acc))
}

/// Banded sums of `ρ` weighted by `max{0, N+1−|k−j|}` over `k ≠ j`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BandSums {
    pub signed: C64,
    pub modulus: f64,
}

pub(crate) fn band_sums(rho: &ResourceState, n: usize) -> BandSums {
    band_sums_with_width(rho, n)
}

/// Band sums with kernel `max{0, width+1−|k−j|}`; the physical kernel has `width = N`.
fn band_sums_with_width(rho: &ResourceState, width: usize) -> BandSums {
    let nu = rho.n_particles();
    let mut signed = C64::new(0.0, 0.0);
    let mut modulus = 0.0;
    for d in 1..=width.min(nu) {
        let w = (width + 1 - d) as f64;
        let mut s = C64::new(0.0, 0.0);
        let mut m = 0.0;
        for k in 0..=nu - d {
            let a = rho.entry(k, k + d);
            let b = rho.entry(k + d, k);
            s += a + b;
            m += a.norm() + b.norm();
        }
        signed += s * w;
        modulus += m * w;
    }
    BandSums { signed, modulus }
}

/// Haar-averaged fidelity
/// `2/(N+2) + Σ_{k≠j} max{0,N+1−|k−j|} ρ_{k,j} / ((N+1)(N+2))`, in `O(νN)`.
pub fn fidelity_closed(rho: &ResourceState, n: usize) -> Result<f64> {
    check_regime(n, rho.n_particles())?;
    let sums = band_sums(rho, n);
    finish_fidelity(sums.signed, n)
}

/// Fidelity with the kernel band widened to `N+1`, used only to check that
/// self-tests detect a corrupted kernel.
#[doc(hidden)]
pub fn fidelity_closed_band_off_by_one(rho: &ResourceState, n: usize) -> Result<f64> {
    check_regime(n, rho.n_particles())?;
    let sums = band_sums_with_width(rho, n + 1);
    let nf = n as f64;
    Ok(2.0 / (nf + 2.0) + sums.signed.re / ((nf + 1.0) * (nf + 2.0)))
}

pub(crate) fn finish_fidelity(signed: C64, n: usize) -> Result<f64> {
    if signed.im.abs() > REAL_RESIDUE_TOL {
        return Err(Error::Numerical(format!("fidelity has imaginary residue {:e}", signed.im)));
    }
    let nf = n as f64;
    let f = 2.0 / (nf + 2.0) + signed.re / ((nf + 1.0) * (nf + 2.0));
    if !(-REAL_RESIDUE_TOL..=1.0 + REAL_RESIDUE_TOL).contains(&f) {
        return Err(Error::Numerical(format!("fidelity {f} outside [0, 1]")));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Haar- and outcome-averaged negativity of the teleported state,
/// `(π/8) Σ_{k≠j} max{0,N+1−|k−j|} |ρ_{k,j}| / (N+1)`.
pub fn avg_entanglement_closed(rho: &ResourceState, n: usize) -> Result<f64> {
    check_regime(n, rho.n_particles())?;
    Ok(PI / 8.0 * band_sums(rho, n).modulus / (n as f64 + 1.0))
}

/// Fidelity of a separable resource, `2/(N+2)`.
pub fn separable_fidelity(n: usize) -> f64 {
    2.0 / (n as f64 + 2.0)
}

/// Average negativity of a Haar-random `N`-particle pure state, `πN/8`.
pub fn max_avg_entanglement(n: usize) -> f64 {
    PI * n as f64 / 8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub n: usize,
    pub nu: usize,
    pub fidelity: f64,
    pub avg_entanglement: f64,
    pub f_sep: f64,
    pub e_max: f64,
}

impl PerformanceReport {
    /// `8E/π − (N+2)f + 2`, non-negative by the triangle inequality.
    pub fn triangle_slack(&self) -> f64 {
        8.0 * self.avg_entanglement / PI - (self.n as f64 + 2.0) * self.fidelity + 2.0
    }
}

pub fn performance(rho: &ResourceState, n: usize) -> Result<PerformanceReport> {
    check_regime(n, rho.n_particles())?;
    let sums = band_sums(rho, n);
    Ok(PerformanceReport {
        n,
        nu: rho.n_particles(),
        fidelity: finish_fidelity(sums.signed, n)?,
        avg_entanglement: PI / 8.0 * sums.modulus / (n as f64 + 1.0),
        f_sep: separable_fidelity(n),
        e_max: max_avg_entanglement(n),
    })
}

/// Total probability of the sectors `0 ≤ l ≤ ν−N`, where a maximally
/// entangled resource reproduces the input exactly.
pub fn perfect_sector_probability(psi: &PureTwoModeState, rho: &ResourceState) -> Result<f64> {
    let basis = check_inputs(psi, rho)?;
    let mut total = 0.0;
    for l in 0..=(basis.nu() - basis.n()) as i64 {
        let block = sector_block(&basis, psi, rho, l);
        total += block.trace().re * basis.multiplicity(l) as f64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{negativity, sample_haar_seeded, seeded_rng};
    use crate::resources::{fock_separable, max_entangled, random_mixed};
    use approx::assert_abs_diff_eq;

    /// The three-branch table for `C_l`.
    fn multiplicity_table(n: usize, nu: usize, l: i64) -> usize {
        let (n, nu) = (n as i64, nu as i64);
        let c = if l <= 0 {
            n + l + 1
        } else if l <= nu - n {
            n + 1
        } else {
            nu - l + 1
        };
        c as usize
    }

    #[test]
    fn multiplicities_follow_the_piecewise_table() {
        let b = MeasurementBasis::new(1, 2).unwrap();
        let cs: Vec<usize> = b.sectors().map(|l| b.multiplicity(l)).collect();
        assert_eq!(cs, vec![1, 2, 2, 1]);
        for n in 1..6 {
            for nu in n..12 {
                let b = MeasurementBasis::new(n, nu).unwrap();
                let mut total = 0;
                for l in b.sectors() {
                    assert_eq!(b.multiplicity(l), multiplicity_table(n, nu, l), "N={n} nu={nu} l={l}");
                    total += b.multiplicity(l);
                }
                assert_eq!(total, (n + 1) * (nu + 1));
                assert_eq!(b.outcomes().count(), b.len());
            }
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        for (n, nu) in [(1, 1), (1, 3), (2, 4), (3, 6), (2, 7)] {
            let b = MeasurementBasis::new(n, nu).unwrap();
            let vecs: Vec<_> = b.outcomes().map(|o| b.product_vector(o)).collect();
            for (i, u) in vecs.iter().enumerate() {
                for (j, v) in vecs.iter().enumerate() {
                    let g = u.dotc(v);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(g.re, expect, epsilon = 1e-12);
                    assert_abs_diff_eq!(g.im, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn projectors_resolve_the_identity() {
        let b = MeasurementBasis::new(2, 4).unwrap();
        let dim = 3 * 5;
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for o in b.outcomes() {
            let v = b.product_vector(o);
            sum += &v * v.adjoint();
        }
        let id = DMatrix::<C64>::identity(dim, dim);
        assert!((sum - id).norm() < 1e-12);
    }

    #[test]
    fn small_resources_are_rejected() {
        assert!(matches!(MeasurementBasis::new(3, 2), Err(Error::Unsupported(_))));
        assert!(MeasurementBasis::new(0, 2).is_err());
        let psi = sample_haar_seeded(3, 0);
        assert!(teleport_outcome(&psi, &max_entangled(2), 0, 0).is_err());
    }

    #[test]
    fn isometry_phases_and_support() {
        let v = bob_isometry(1, 3, 1, 1).unwrap();
        // k=0: |1⟩⟨2|, k=1: −|0⟩⟨1|
        assert_abs_diff_eq!(v[(1, 2)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[(0, 1)].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[(0, 1)].im, 0.0, epsilon = 1e-15);

        let zero_phase = bob_isometry(2, 5, 1, 0).unwrap();
        assert!(zero_phase.iter().all(|c| c.im == 0.0 && (c.re == 0.0 || c.re == 1.0)));

        let b = MeasurementBasis::new(2, 5).unwrap();
        for o in b.outcomes() {
            let v = b.bob_isometry(o).unwrap();
            let vv = v.adjoint() * &v;
            let mut proj = DMatrix::<C64>::zeros(6, 6);
            for k in b.k_range(o.l) {
                let m = (5 - k as i64 - o.l) as usize;
                proj[(m, m)] = C64::new(1.0, 0.0);
            }
            assert!((vv - proj).norm() < 1e-12, "{o:?}");
        }
        assert!(bob_isometry(2, 5, 6, 0).is_err());
        assert!(bob_isometry(2, 5, 0, 3).is_err());
        assert!(bob_isometry(2, 5, -3, 0).is_err());
    }

    #[test]
    fn maximally_entangled_resource_teleports_perfectly_in_the_bulk() {
        let psi = sample_haar_seeded(2, 11);
        let rho = max_entangled(6);
        for o in teleport_all(&psi, &rho).unwrap() {
            if (0..=4).contains(&o.outcome.l) {
                assert_abs_diff_eq!(o.conditional_fidelity(&psi).unwrap(), 1.0, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(perfect_sector_probability(&psi, &rho).unwrap(), 5.0 / 7.0, epsilon = 1e-12);
        let psi1 = sample_haar_seeded(1, 3);
        assert_abs_diff_eq!(perfect_sector_probability(&psi1, &max_entangled(3)).unwrap(), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(perfect_sector_probability(&psi, &max_entangled(2)).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn success_probability_is_independent_of_the_input() {
        let rho = max_entangled(6);
        let first = perfect_sector_probability(&sample_haar_seeded(2, 0), &rho).unwrap();
        for seed in 1..100 {
            let p = perfect_sector_probability(&sample_haar_seeded(2, seed), &rho).unwrap();
            assert_abs_diff_eq!(p, first, epsilon = 1e-12);
        }
    }

    #[test]
    fn outcome_probabilities_are_complete() {
        let mut rng = seeded_rng(5);
        for seed in 0..20 {
            let psi = sample_haar_seeded(2, seed);
            let rho = random_mixed(4, 3, &mut rng);
            let total: f64 = teleport_all(&psi, &rho).unwrap().iter().map(|o| o.probability).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
            for o in teleport_all(&psi, &rho).unwrap() {
                if let Some(s) = &o.state {
                    assert_abs_diff_eq!(s.trace(), 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_probability_outcomes_are_null() {
        let psi = sample_haar_seeded(1, 0);
        let rho = fock_separable(3, 3).unwrap();
        let outcomes = teleport_all(&psi, &rho).unwrap();
        assert!(outcomes.iter().any(|o| o.state.is_none() && o.probability == 0.0));
        assert!(outcomes.iter().all(|o| o.state.is_some() == (o.probability > 0.0)));
    }

    #[test]
    fn both_average_paths_agree() {
        let mut rng = seeded_rng(9);
        for seed in 0..10 {
            let psi = sample_haar_seeded(3, seed);
            let rho = random_mixed(6, 2, &mut rng);
            let a = average_teleported(&psi, &rho).unwrap();
            let b = average_teleported_closed(&psi, &rho).unwrap();
            assert!((a.matrix() - b.matrix()).norm() < 1e-12);
            assert_abs_diff_eq!(b.trace(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn separable_resource_gives_the_dephased_input() {
        let psi = sample_haar_seeded(2, 4);
        let t = average_teleported_closed(&psi, &fock_separable(5, 5).unwrap()).unwrap();
        for k in 0..3 {
            for j in 0..3 {
                let expect = if k == j { psi.amplitude(k).norm_sqr() } else { 0.0 };
                assert_abs_diff_eq!(t.matrix()[(k, j)].re, expect, epsilon = 1e-14);
                assert_abs_diff_eq!(t.matrix()[(k, j)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn closed_form_baselines() {
        assert_abs_diff_eq!(fidelity_closed(&fock_separable(4, 1).unwrap(), 2).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity_closed(&max_entangled(3), 1).unwrap(), 11.0 / 12.0, epsilon = 1e-14);
        assert_eq!(avg_entanglement_closed(&fock_separable(4, 1).unwrap(), 2).unwrap(), 0.0);
        assert_abs_diff_eq!(
            avg_entanglement_closed(&max_entangled(3), 1).unwrap(),
            3.0 * PI / 32.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn overlap_with_teleported_state_grows_with_resource_size() {
        let psi = sample_haar_seeded(2, 8);
        let mut last = 0.0;
        for nu in [4, 16, 64, 256] {
            let t = average_teleported_closed(&psi, &max_entangled(nu)).unwrap();
            let ov = t.overlap(&psi).unwrap();
            assert!(ov > last);
            last = ov;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn negativity_of_outcome_matches_closed_per_sector_value() {
        let psi = sample_haar_seeded(2, 1);
        let rho = max_entangled(4);
        for o in teleport_all(&psi, &rho).unwrap() {
            if let Some(s) = &o.state {
                assert_abs_diff_eq!(o.negativity(), negativity(s), epsilon = 0.0);
            }
        }
    }
}
