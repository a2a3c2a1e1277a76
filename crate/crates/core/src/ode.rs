//! Adaptive Dormand-Prince 5(4) integration of complex linear systems.

use crate::error::{Error, Result};
use crate::fock::C64;

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order weights equal the last stage row, so stage 7 is `f` at the accepted point.
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub abs: f64,
    pub rel: f64,
    pub min_step: f64,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-10, min_step: 1e-14 }
    }
}

/// Integrates the autonomous system `y' = f(y)` and records `y` at each of the increasing
/// `outputs`, starting from time 0 with trial step `h0`.
#[allow(clippy::needless_range_loop)]
pub fn integrate<F>(f: F, y0: Vec<C64>, outputs: &[f64], h0: f64, tol: OdeTolerance) -> Result<Vec<Vec<C64>>>
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = y0.len();
    let mut y = y0;
    let mut t = 0.0;
    let mut h = h0;
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let mut fresh = true;
    let mut out = Vec::with_capacity(outputs.len());
    for &target in outputs {
        if target < t {
            return Err(Error::InvalidArgument("output times must be non-decreasing and non-negative".into()));
        }
        while t < target {
            let step = h.min(target - t);
            let last = step >= target - t;
            if fresh {
                f(&y, &mut k[0]);
                fresh = false;
            }
            for s in 1..7 {
                let (head, tail) = k.split_at_mut(s);
                for i in 0..n {
                    let mut acc = y[i];
                    for (r, row) in head.iter().enumerate() {
                        acc += row[i] * (step * A[s][r]);
                    }
                    stage[i] = acc;
                }
                f(&stage, &mut tail[0]);
            }
            let mut err = 0.0f64;
            let mut next = vec![C64::new(0.0, 0.0); n];
            for i in 0..n {
                let mut hi = y[i];
                let mut e = C64::new(0.0, 0.0);
                for s in 0..7 {
                    hi += k[s][i] * (step * B5[s]);
                    e += k[s][i] * (step * (B5[s] - B4[s]));
                }
                let scale = tol.abs + tol.rel * y[i].norm().max(hi.norm());
                err = err.max(e.norm() / scale);
                next[i] = hi;
            }
            if !err.is_finite() {
                return Err(Error::Numerical("non-finite derivative in ODE integration".into()));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = next;
                k.swap(0, 6);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 && last {
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
            if h < tol.min_step {
                return Err(Error::Numerical(format!("ODE step size underflow at t={t}")));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_rotation() {
        let z = C64::new(-0.7, 2.0);
        let out = integrate(
            |y, dy| dy[0] = z * y[0],
            vec![C64::new(1.0, 0.0)],
            &[0.5, 1.0, 3.0],
            0.01,
            OdeTolerance::default(),
        )
        .unwrap();
        for (t, y) in [0.5, 1.0, 3.0].iter().zip(&out) {
            assert!((y[0] - (z * t).exp()).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_time_returns_the_initial_state() {
        let out = integrate(|_, dy| dy[0] = C64::new(1.0, 0.0), vec![C64::new(2.0, 0.0)], &[0.0], 0.1, OdeTolerance::default())
            .unwrap();
        assert_eq!(out[0][0], C64::new(2.0, 0.0));
    }
}
