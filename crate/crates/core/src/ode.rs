//! Adaptive Dormand–Prince 5(4) integrator on flat real vectors.
//!
//! Complex states are stored as separate real and imaginary halves by the
//! callers; the integrator only sees `f64` slices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step; `None` uses a quarter of the interval.
    pub h_max: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-13, max_steps: 2_000_000, h_max: None }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl core::ops::AddAssign for Stats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Reusable DOPRI5 workspace for vectors of a fixed length.
pub struct Dopri5 {
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    /// Step accepted at the end of the previous call, reused as the first guess.
    last_h: Option<f64>,
}

impl Dopri5 {
    pub fn new(n: usize) -> Self {
        Self {
            k: core::array::from_fn(|_| vec![0.0; n]),
            ytmp: vec![0.0; n],
            ynew: vec![0.0; n],
            last_h: None,
        }
    }

    pub fn len(&self) -> usize {
        self.ytmp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ytmp.is_empty()
    }

    /// Integrate `y' = f(t, y)` from `t0` to `t1` in place.
    pub fn integrate<F>(&mut self, mut f: F, t0: f64, t1: f64, y: &mut [f64], tol: &Tolerances) -> Result<Stats>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        assert_eq!(y.len(), self.len(), "state length does not match workspace");
        let mut stats = Stats::default();
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(stats);
        }
        let dir = span.signum();
        let h_max = tol.h_max.unwrap_or(span.abs() / 4.0).min(span.abs());
        let n = y.len();

        f(t0, y, &mut self.k[0]);
        stats.evaluations += 1;
        let mut h = match self.last_h.take() {
            Some(h) => h.min(h_max),
            None => self.initial_step(&mut f, t0, y, tol, h_max, &mut stats),
        };
        let mut t = t0;
        let mut err_prev: f64 = 1e-4;
        loop {
            if stats.accepted + stats.rejected >= tol.max_steps {
                return Err(Error::TooManySteps { t, steps: tol.max_steps });
            }
            let remaining = (t1 - t) * dir;
            // Absorb a sliver left by rounding into the final step.
            let last = h >= remaining - 1e-12 * t1.abs().max(1.0);
            if last {
                h = remaining;
            }
            let hs = h * dir;
            if !last && h <= 1e-15 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t });
            }
            let err = self.attempt(&mut f, t, hs, y, tol);
            stats.evaluations += 6;
            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { t1 } else { t + hs };
                y.copy_from_slice(&self.ynew[..n]);
                self.k.swap(0, 6);
                // PI controller (Hairer & Wanner, beta = 0.04).
                let e = err.max(1e-10);
                let fac = (0.9 * e.powf(-0.17) * err_prev.powf(0.04)).clamp(0.2, 10.0);
                err_prev = e;
                if last {
                    self.last_h = Some((h * fac).min(h_max));
                    return Ok(stats);
                }
                h = (h * fac).min(h_max);
            } else {
                stats.rejected += 1;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                h *= fac;
            }
        }
    }

    fn initial_step<F>(&mut self, f: &mut F, t0: f64, y: &[f64], tol: &Tolerances, h_max: f64, stats: &mut Stats) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len() as f64;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for (yi, fi) in y.iter().zip(&self.k[0]) {
            let sc = tol.atol + tol.rtol * yi.abs();
            d0 += (yi / sc) * (yi / sc);
            d1 += (fi / sc) * (fi / sc);
        }
        d0 = (d0 / n).sqrt();
        d1 = (d1 / n).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(h_max);
        for ((yt, yi), fi) in self.ytmp.iter_mut().zip(y).zip(&self.k[0]) {
            *yt = yi + h0 * fi;
        }
        f(t0 + h0, &self.ytmp, &mut self.k[1]);
        stats.evaluations += 1;
        let mut d2 = 0.0;
        for ((yi, f1), f0) in y.iter().zip(&self.k[1]).zip(&self.k[0]) {
            let sc = tol.atol + tol.rtol * yi.abs();
            let v = (f1 - f0) / sc;
            d2 += v * v;
        }
        d2 = (d2 / n).sqrt() / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
        (100.0 * h0).min(h1).min(h_max)
    }

    /// One trial step; leaves the candidate in `ynew` and f(t+h, ynew) in k[6].
    fn attempt<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[f64], tol: &Tolerances) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let yt = &mut self.ytmp;
        for i in 0..n {
            yt[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, yt, k2);
        for i in 0..n {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, yt, k3);
        for i in 0..n {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, yt, k4);
        for i in 0..n {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, yt, k5);
        for i in 0..n {
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, yt, k6);
        let yn = &mut self.ynew;
        for i in 0..n {
            yn[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + h, yn, k7);
        let mut acc = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(yn[i].abs());
            let r = e / sc;
            acc += r * r;
        }
        (acc / n as f64).sqrt()
    }
}

/// Convenience wrapper allocating a fresh workspace.
pub fn integrate<F>(f: F, t0: f64, t1: f64, y: &mut [f64], tol: &Tolerances) -> Result<Stats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    Dopri5::new(y.len()).integrate(f, t0, t1, y, tol)
}

/// ∫ g(t) dt over [a, b] by integrating a scalar ODE with the same stepper.
pub fn quad<G>(mut g: G, a: f64, b: f64, tol: &Tolerances) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let mut y = [0.0];
    integrate(|t, _y, dy| dy[0] = g(t), a, b, &mut y, tol)?;
    Ok(y[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase_is_exact_to_tolerance() {
        let mut y = [1.0, 0.0];
        let tol = Tolerances::new(1e-12, 1e-14);
        integrate(|_, y, dy| { dy[0] = y[1]; dy[1] = -y[0]; }, 0.0, 20.0, &mut y, &tol).unwrap();
        assert!((y[0] - 20f64.cos()).abs() < 1e-9);
        assert!((y[1] + 20f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn backward_integration() {
        let mut y = [1.0];
        integrate(|_, y, dy| dy[0] = y[0], 1.0, 0.0, &mut y, &Tolerances::default()).unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn quadrature_of_gaussian() {
        let v = quad(|t| (-t * t).exp(), -8.0, 8.0, &Tolerances::new(1e-12, 1e-15)).unwrap();
        assert!((v - crate::math::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn step_limit_is_reported() {
        let mut y = [1.0, 0.0];
        let tol = Tolerances { max_steps: 3, ..Tolerances::default() };
        let r = integrate(|_, y, dy| { dy[0] = 100.0 * y[1]; dy[1] = -100.0 * y[0]; }, 0.0, 10.0, &mut y, &tol);
        assert!(matches!(r, Err(Error::TooManySteps { .. })));
    }
}
