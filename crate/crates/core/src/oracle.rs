//! Reference computations that follow the protocol operator by operator.
//!
//! Nothing here uses the collapsed index form of the protocol module: the
//! measurement vectors and Bob's operator are rebuilt from their defining
//! sums, the resource is embedded into the product space of modes 3 and 4,
//! and the outcome is the explicit contraction
//! `tr₂₃[(1⊗P⊗V)(|ψ⟩⟨ψ|⊗ρ)(1⊗P⊗V)†]`.
//! Cost grows like `(N+1)²(ν+1)⁴` per outcome, so use small `N` and `ν`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{PureTwoModeState, ResourceState, C64};

/// Dimensions and sector bookkeeping for one `(N, ν)` pair.
#[derive(Debug, Clone, Copy)]
pub struct Contraction {
    n: usize,
    nu: usize,
}

impl Contraction {
    pub fn new(n: usize, nu: usize) -> Result<Self> {
        if n == 0 || nu < n {
            return Err(Error::Unsupported(format!("oracle needs 1 <= N <= nu, got N={n}, nu={nu}")));
        }
        Ok(Self { n, nu })
    }

    fn sector(&self, l: i64) -> Vec<usize> {
        (0..=self.n).filter(|&k| k as i64 + l >= 0 && k as i64 + l <= self.nu as i64).collect()
    }

    /// `|φ^{(l,λ)}⟩` over `(n₂, n₃)`, index `n₂·(ν+1)+n₃`.
    pub fn measurement_vector(&self, l: i64, lambda: usize) -> DVector<C64> {
        let ks = self.sector(l);
        let c = ks.len() as f64;
        let d3 = self.nu + 1;
        let mut v = DVector::zeros((self.n + 1) * d3);
        for &k in &ks {
            let phase = C64::from_polar(1.0 / c.sqrt(), 2.0 * PI * (lambda * k) as f64 / c);
            v[(self.n - k) * d3 + (k as i64 + l) as usize] = phase;
        }
        v
    }

    /// `V₄^{(l,λ)}` as an operator on mode-4 occupations `0..=ν`.
    pub fn bob_operator(&self, l: i64, lambda: usize) -> DMatrix<C64> {
        let ks = self.sector(l);
        let c = ks.len() as f64;
        let mut v = DMatrix::zeros(self.nu + 1, self.nu + 1);
        for &k in &ks {
            let from = (self.nu as i64 - k as i64 - l) as usize;
            v[(self.n - k, from)] = C64::from_polar(1.0, 2.0 * PI * (lambda * k) as f64 / c);
        }
        v
    }

    /// The resource as an operator on the product space of modes 3 and 4,
    /// index `n₃·(ν+1)+n₄`.
    pub fn embed_resource(&self, rho: &ResourceState) -> DMatrix<C64> {
        let d = self.nu + 1;
        let mut full = DMatrix::zeros(d * d, d * d);
        for k in 0..d {
            for j in 0..d {
                full[(k * d + (self.nu - k), j * d + (self.nu - j))] = rho.entry(k, j);
            }
        }
        full
    }

    /// A two-mode vector over `(n₁, n₂)` with amplitude `c_k` on `|k, N−k⟩`.
    pub fn embed_input(&self, amplitudes: &DVector<C64>) -> DVector<C64> {
        let d = self.n + 1;
        let mut v = DVector::zeros(d * d);
        for k in 0..d {
            v[k * d + (self.n - k)] = amplitudes[k];
        }
        v
    }

    /// `A[(n₁,m₄),(n₃,n₄)] = Σ_{n₂} φ̄(n₂,n₃) u(n₁,n₂) V(m₄,n₄)`.
    fn ket_map(&self, u: &DVector<C64>, phi: &DVector<C64>, v: &DMatrix<C64>) -> DMatrix<C64> {
        let (d1, d2, d3, d4) = (self.n + 1, self.n + 1, self.nu + 1, self.nu + 1);
        let mut a = DMatrix::zeros(d1 * d4, d3 * d4);
        for n1 in 0..d1 {
            for n3 in 0..d3 {
                let mut amp = C64::new(0.0, 0.0);
                for n2 in 0..d2 {
                    amp += phi[n2 * d3 + n3].conj() * u[n1 * d2 + n2];
                }
                if amp == C64::new(0.0, 0.0) {
                    continue;
                }
                for m4 in 0..d4 {
                    for n4 in 0..d4 {
                        a[(n1 * d4 + m4, n3 * d4 + n4)] += amp * v[(m4, n4)];
                    }
                }
            }
        }
        a
    }

    /// `tr₂₃[(1⊗P⊗V)(|u⟩⟨w|⊗ρ)(1⊗P⊗V)†]` as an operator on modes 1 and 4,
    /// index `n₁·(ν+1)+m₄`. Bob's operator is replaced by the identity when
    /// `apply_isometry` is false.
    pub fn contract(
        &self,
        ket: &DVector<C64>,
        bra: &DVector<C64>,
        rho_embedded: &DMatrix<C64>,
        l: i64,
        lambda: usize,
        apply_isometry: bool,
    ) -> DMatrix<C64> {
        let phi = self.measurement_vector(l, lambda);
        let v = if apply_isometry {
            self.bob_operator(l, lambda)
        } else {
            DMatrix::identity(self.nu + 1, self.nu + 1)
        };
        let a_ket = self.ket_map(&self.embed_input(ket), &phi, &v);
        let a_bra = self.ket_map(&self.embed_input(bra), &phi, &v);
        &a_ket * rho_embedded * a_bra.adjoint()
    }

    /// Restricts an operator on modes 1,4 to `|k⟩₁|N−k⟩₄`, returning the
    /// restricted block and the Frobenius norm of everything outside it.
    pub fn restrict_to_n_particles(&self, full: &DMatrix<C64>) -> (DMatrix<C64>, f64) {
        let d4 = self.nu + 1;
        let idx = |k: usize| k * d4 + (self.n - k);
        let block = DMatrix::from_fn(self.n + 1, self.n + 1, |k, j| full[(idx(k), idx(j))]);
        let inside: Vec<bool> = (0..full.nrows()).map(|r| r % d4 + r / d4 == self.n).collect();
        let mut outside = 0.0;
        for ((r, c), v) in (0..full.ncols()).flat_map(|c| (0..full.nrows()).map(move |r| (r, c))).zip(full.iter()) {
            if !(inside[r] && inside[c]) {
                outside += v.norm_sqr();
            }
        }
        let leak = outside.sqrt();
        (block, leak)
    }

    pub fn outcomes(&self) -> Vec<(i64, usize)> {
        let mut out = Vec::new();
        for l in -(self.n as i64)..=self.nu as i64 {
            for lambda in 0..self.sector(l).len() {
                out.push((l, lambda));
            }
        }
        out
    }
}

/// `(p, p·ρ14)` for outcome `(l, λ)` from the explicit four-mode contraction,
/// with the result still on the full product space of modes 1 and 4.
pub fn teleport_outcome_oracle(
    psi: &PureTwoModeState,
    rho: &ResourceState,
    l: i64,
    lambda: usize,
    apply_isometry: bool,
) -> Result<(f64, DMatrix<C64>)> {
    let c = Contraction::new(psi.n_particles(), rho.n_particles())?;
    let embedded = c.embed_resource(rho);
    let r = c.contract(psi.amplitudes(), psi.amplitudes(), &embedded, l, lambda, apply_isometry);
    Ok((r.trace().re, r))
}

/// Exact Haar average of `⟨ψ|T[|ψ⟩⟨ψ|]|ψ⟩` from fourth moments of the
/// uniform measure, `E[c_a c̄_b c_k c̄_j] = (δ_ab δ_kj + δ_aj δ_kb)/((N+1)(N+2))`,
/// with `T` evaluated on basis operators through the four-mode contraction.
pub fn haar_moment_fidelity(rho: &ResourceState, n: usize) -> Result<f64> {
    let c = Contraction::new(n, rho.n_particles())?;
    let embedded = c.embed_resource(rho);
    let d = n + 1;
    let unit = |k: usize| DVector::from_fn(d, |i, _| if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let d4 = c.nu + 1;
    let mut total = C64::new(0.0, 0.0);
    for (l, lambda) in c.outcomes() {
        for k in 0..d {
            for j in 0..d {
                let r = c.contract(&unit(k), &unit(j), &embedded, l, lambda, true);
                // ⟨k|T(|k⟩⟨j|)|j⟩ on the N-particle sector of modes 1,4
                let entry = r[(k * d4 + (n - k), j * d4 + (n - j))];
                let weight = if k == j { 2.0 } else { 1.0 };
                total += entry * weight;
            }
        }
    }
    Ok(total.re / (d as f64 * (d as f64 + 1.0)))
}
