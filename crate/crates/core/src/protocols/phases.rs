//! C_Z phase condition, adiabatic dynamical phases and adiabaticity margin.

use alloc::vec::Vec;
use num_complex::Complex64;

use super::envelope::PulseEnvelope;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::{wrap_angle, PI};
use crate::ode::{Dopri5, Tolerances};

/// Distance of φ₁₁ − φ₀₁ − φ₁₀ from the nearest odd multiple of π.
///
/// Single-qubit phases on |1⟩ can remove φ₀₁ and φ₁₀, leaving the conditional
/// phase φ₁₁ − φ₀₁ − φ₁₀ which must equal π for a C_Z.
pub fn cz_phase_defect(phi01: f64, phi10: f64, phi11: f64) -> f64 {
    wrap_angle(phi11 - phi01 - phi10 - PI).abs()
}

/// Same defect with its sign, in (−π, π].
pub fn cz_phase_defect_signed(phi01: f64, phi10: f64, phi11: f64) -> f64 {
    wrap_angle(phi11 - phi01 - phi10 - PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatePhases {
    pub phi01: f64,
    pub phi10: f64,
    pub phi11: f64,
    pub defect: f64,
}

impl GatePhases {
    fn new(phi01: f64, phi11: f64) -> Self {
        Self { phi01, phi10: phi01, phi11, defect: cz_phase_defect(phi01, phi01, phi11) }
    }
}

fn one_atom(omega: f64, delta: f64) -> [f64; 4] {
    [0.0, 0.5 * omega, 0.5 * omega, delta]
}

fn two_atom(omega: f64, delta: f64, blockade: f64) -> [f64; 9] {
    let c = omega / 2f64.sqrt();
    [0.0, c, 0.0, c, delta, c, 0.0, c, 2.0 * delta + blockade]
}

/// Tracks the eigenvalue branch of a symmetric family continuously connected
/// to the first basis vector, by eigenvector overlap.
struct BranchTracker<F: Fn(f64) -> Vec<f64>> {
    h: F,
    n: usize,
    vec: Vec<f64>,
}

impl<F: Fn(f64) -> Vec<f64>> BranchTracker<F> {
    fn new(h: F, n: usize, t0: f64) -> Self {
        let mut tr = Self { h, n, vec: Vec::new() };
        let (w, v) = symmetric_eigen(&(tr.h)(t0), n);
        // At the window edge Ω ≈ 0, so pick the eigenvector with most weight on state 0.
        let k = (0..n).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
        let _ = w;
        tr.vec = (0..n).map(|r| v[r * n + k]).collect();
        tr
    }

    fn step(&mut self, t0: f64, t1: f64, depth: u32) -> Result<f64> {
        let n = self.n;
        let (w, v) = symmetric_eigen(&(self.h)(t1), n);
        let mut best = (0usize, -1.0f64);
        for k in 0..n {
            let ov: f64 = (0..n).map(|r| v[r * n + k] * self.vec[r]).sum::<f64>().abs();
            if ov > best.1 {
                best = (k, ov);
            }
        }
        if best.1 < 0.9 {
            if depth >= 30 {
                return Err(Error::BranchTracking { t: t1, overlap: best.1 });
            }
            let mid = 0.5 * (t0 + t1);
            self.step(t0, mid, depth + 1)?;
            return self.step(mid, t1, depth + 1);
        }
        let k = best.0;
        let sign = if (0..n).map(|r| v[r * n + k] * self.vec[r]).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        self.vec = (0..n).map(|r| sign * v[r * n + k]).collect();
        Ok(w[k])
    }
}

/// Composite Simpson integral of a tracked eigenvalue branch.
fn branch_integral<F: Fn(f64) -> Vec<f64>>(h: F, n: usize, t0: f64, t1: f64, intervals: usize) -> Result<f64> {
    let m = intervals + intervals % 2;
    let dt = (t1 - t0) / m as f64;
    let mut tr = BranchTracker::new(h, n, t0);
    let first = {
        let (w, v) = symmetric_eigen(&(tr.h)(t0), n);
        let k = (0..n).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
        w[k]
    };
    let mut acc = first;
    let mut prev = t0;
    for i in 1..=m {
        let t = t0 + dt * i as f64;
        let lam = tr.step(prev, t, 0)?;
        let wgt = if i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += wgt * lam;
        prev = t;
    }
    Ok(acc * dt / 3.0)
}

/// Adiabatic phases φ = −∫λ dt of the branches connected to |1⟩ and |11⟩.
///
/// The rotating frame puts |0⟩ and |1⟩ at zero energy and the Rydberg level at +Δ.
pub fn dynamical_phases(env: &PulseEnvelope, blockade: f64) -> Result<GatePhases> {
    let Some((t0, t1)) = env.support() else {
        return Ok(GatePhases::new(0.0, 0.0));
    };
    let delta = env.detuning;
    let steps = 8000;
    let l1 = branch_integral(|t| one_atom(env.omega(t), delta).to_vec(), 2, t0, t1, steps)?;
    let l11 = branch_integral(|t| two_atom(env.omega(t), delta, blockade).to_vec(), 3, t0, t1, steps)?;
    Ok(GatePhases::new(-l1, -l11))
}

/// Phases of the |01⟩ and |11⟩ amplitudes from exact internal-state propagation (no motion, Γ = 0).
pub fn propagated_phases(env: &PulseEnvelope, blockade: f64, tol: &Tolerances) -> Result<(GatePhases, PropagatedPopulations)> {
    let Some((t0, t1)) = env.support() else {
        return Ok((GatePhases::new(0.0, 0.0), PropagatedPopulations::default()));
    };
    let delta = env.detuning;
    // y = [re c1, re cR, im c1, im cR]
    let mut y1 = [1.0, 0.0, 0.0, 0.0];
    let mut ode = Dopri5::new(4);
    for (a, b) in split(env, t0, t1) {
        ode.integrate(
            |t, y, dy| {
                let h = one_atom(env.omega(t), delta);
                for r in 0..2 {
                    let (mut re, mut im) = (0.0, 0.0);
                    for c in 0..2 {
                        re += h[r * 2 + c] * y[2 + c];
                        im -= h[r * 2 + c] * y[c];
                    }
                    dy[r] = re;
                    dy[2 + r] = im;
                }
            },
            a,
            b,
            &mut y1,
            tol,
        )?;
    }
    let mut y2 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let mut ode = Dopri5::new(6);
    for (a, b) in split(env, t0, t1) {
        ode.integrate(
            |t, y, dy| {
                let h = two_atom(env.omega(t), delta, blockade);
                for r in 0..3 {
                    let (mut re, mut im) = (0.0, 0.0);
                    for c in 0..3 {
                        re += h[r * 3 + c] * y[3 + c];
                        im -= h[r * 3 + c] * y[c];
                    }
                    dy[r] = re;
                    dy[3 + r] = im;
                }
            },
            a,
            b,
            &mut y2,
            tol,
        )?;
    }
    let c01 = Complex64::new(y1[0], y1[2]);
    let c11 = Complex64::new(y2[0], y2[3]);
    let pops = PropagatedPopulations {
        amp01: c01,
        amp11: c11,
        residual_rydberg_one: y1[1] * y1[1] + y1[3] * y1[3],
        residual_rydberg_two: 1.0 - c11.norm_sqr(),
    };
    Ok((GatePhases::new(c01.arg(), c11.arg()), pops))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PropagatedPopulations {
    pub amp01: Complex64,
    pub amp11: Complex64,
    pub residual_rydberg_one: f64,
    pub residual_rydberg_two: f64,
}

fn split(env: &PulseEnvelope, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    let mut b: Vec<f64> = env.breakpoints().into_iter().filter(|&t| t > t0 && t < t1).collect();
    b.push(t0);
    b.push(t1);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b.windows(2).map(|w| (w[0], w[1])).collect()
}

/// min_t (Δ² + Ω²)^{3/2}/|Δ·dΩ/dt|, i.e. the gap over the mixing-angle rate with tan θ = Ω/Δ.
/// Returns `f64::MAX` when the mixing angle never moves.
pub fn adiabaticity_margin(env: &PulseEnvelope, delta: f64) -> f64 {
    let Some((t0, t1)) = env.support() else {
        return f64::MAX;
    };
    let n = 4000;
    let mut best = f64::MAX;
    for i in 0..=n {
        let t = t0 + (t1 - t0) * i as f64 / n as f64;
        let om = env.omega(t);
        let rate = (delta * env.omega_dot(t)).abs();
        if rate == 0.0 {
            continue;
        }
        let m = (delta * delta + om * om).powf(1.5) / rate;
        best = best.min(m);
    }
    best
}
