//! Harmonic-oscillator number basis and the operators the engines need.
//!
//! Engines work in the "twisted" basis |ñ⟩ = iⁿ|n⟩. There the displacement
//! e^{iη(a+a†)} and the free kinetic energy are both real, so amplitudes can
//! be propagated with real matrix products. Number-diagonal observables and
//! overlaps are unaffected by the per-state phases.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::linalg::CMatrix;
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::ln_gamma;

#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    pub n_max: usize,
    pub omega: f64,
    /// η = K√(ħ/2Mω).
    pub lamb_dicke: f64,
    /// Twisted-basis displacement, (n_max+1)² row-major.
    pub displacement: Vec<f64>,
}

impl FockBasis {
    pub fn new(n_max: usize, omega: f64, kick: f64, hbar_over_mass: f64) -> Self {
        let eta = lamb_dicke(kick, omega, hbar_over_mass);
        Self { n_max, omega, lamb_dicke: eta, displacement: displacement_twisted(n_max, eta) }
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

pub fn lamb_dicke(kick: f64, omega: f64, hbar_over_mass: f64) -> f64 {
    kick * (hbar_over_mass / (2.0 * omega)).sqrt()
}

/// |⟨m|e^{iη(a+a†)}|n⟩| up to sign: e^{−η²/2}√(n<!/n>!) η^{|m−n|} L_{n<}^{(|m−n|)}(η²).
fn displacement_real(m: usize, n: usize, eta: f64) -> f64 {
    let (lo, hi) = if m < n { (m, n) } else { (n, m) };
    let d = hi - lo;
    let x = eta * eta;
    let lag = laguerre(lo, d as f64, x);
    if d > 0 && eta == 0.0 {
        return 0.0;
    }
    let log_pref = 0.5 * (ln_gamma(lo as f64 + 1.0) - ln_gamma(hi as f64 + 1.0)) + d as f64 * eta.abs().ln() - 0.5 * x;
    let sign = if eta < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
    let v = if d == 0 { (-0.5 * x).exp() * lag } else { sign * log_pref.exp() * lag };
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Generalized Laguerre polynomial by upward recurrence.
fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let mut l1 = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + alpha - x) * l1 - (kf + alpha) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// ⟨m|e^{iη(a+a†)}|n⟩ in the number basis, closed form.
pub fn build_displacement(n_max: usize, eta: f64) -> CMatrix {
    let n = n_max + 1;
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let phase = Complex64::i().powu(r.abs_diff(c) as u32);
            out.set(r, c, phase * displacement_real(r, c, eta));
        }
    }
    out
}

/// Displacement in the twisted basis: real, lower triangle positive, upper triangle (−1)^{n−m}.
pub fn displacement_twisted(n_max: usize, eta: f64) -> Vec<f64> {
    let n = n_max + 1;
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let v = displacement_real(r, c, eta);
            out[r * n + c] = if r < c && (c - r) % 2 == 1 { -v } else { v };
        }
    }
    out
}

/// Truncated-space exponential series Σ_{j≤order} (iη(a+a†))^j/j!.
pub fn displacement_taylor(n_max: usize, eta: f64, order: usize) -> CMatrix {
    let n = n_max + 1;
    let mut x = CMatrix::zeros(n, n);
    for m in 0..n - 1 {
        let v = Complex64::new(0.0, eta * ((m + 1) as f64).sqrt());
        x.set(m, m + 1, v);
        x.set(m + 1, m, v);
    }
    let mut term = CMatrix::identity(n);
    let mut sum = term.clone();
    for j in 1..=order {
        term = term.matmul(&x);
        for v in term.data.iter_mut() {
            *v /= j as f64;
        }
        for (s, t) in sum.data.iter_mut().zip(&term.data) {
            *s += t;
        }
    }
    sum
}

/// Coupling m ↔ m+2 of the free kinetic energy (ω/4)(2n+1 + a² + a†²) in the twisted basis.
pub fn kinetic_offdiag(n_max: usize, omega: f64) -> Vec<f64> {
    (0..n_max.saturating_sub(1)).map(|m| 0.25 * omega * (((m + 1) * (m + 2)) as f64).sqrt()).collect()
}

/// Coupling m ↔ m+1 of the position operator s(a + a†) in the ordinary basis.
pub fn position_offdiag(n_max: usize, scale: f64) -> Vec<f64> {
    (0..n_max).map(|m| scale * ((m + 1) as f64).sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Normalized HO eigenfunctions on a grid (units with x₀ = 1/√2, so x = (a+a†)/√2·√2 = ξ).
    fn hermite_functions(nmax: usize, xi: f64) -> Vec<f64> {
        // ψ_n(ξ) for the oscillator with ⟨ξ²⟩₀ = 1/2; a + a† = √2 ξ.
        let mut out = vec![0.0; nmax + 1];
        out[0] = core::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
        if nmax >= 1 {
            out[1] = 2f64.sqrt() * xi * out[0];
        }
        for n in 2..=nmax {
            let nf = n as f64;
            out[n] = (2.0 / nf).sqrt() * xi * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
        }
        out
    }

    fn quadrature_displacement(nmax: usize, eta: f64) -> CMatrix {
        // e^{iη(a+a†)} = e^{i√2 η ξ}.
        let (lo, hi, m) = (-14.0, 14.0, 6000);
        let h = (hi - lo) / m as f64;
        let mut out = CMatrix::zeros(nmax + 1, nmax + 1);
        for i in 0..=m {
            let xi = lo + h * i as f64;
            let w = if i == 0 || i == m { 0.5 * h } else { h };
            let f = hermite_functions(nmax, xi);
            let ph = Complex64::from_polar(w, 2f64.sqrt() * eta * xi);
            for r in 0..=nmax {
                for c in 0..=nmax {
                    let v = out.get(r, c) + ph * f[r] * f[c];
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    #[test]
    fn zero_kick_is_identity() {
        assert!(build_displacement(8, 0.0).max_abs_diff(&CMatrix::identity(9)) < 1e-15);
    }

    #[test]
    fn ground_element() {
        for eta in [0.05, 0.2, 0.7] {
            let d = build_displacement(3, eta);
            assert!((d.get(0, 0).re - (-0.5 * eta * eta).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_position_grid_quadrature() {
        for eta in [0.1, 0.45, 1.1] {
            let d = build_displacement(12, eta);
            let q = quadrature_displacement(12, eta);
            assert!(d.max_abs_diff(&q) < 1e-8, "{eta}: {}", d.max_abs_diff(&q));
        }
    }

    #[test]
    fn twisted_form_is_the_rephased_matrix() {
        let eta = 0.37;
        let d = build_displacement(9, eta);
        let t = displacement_twisted(9, eta);
        for r in 0..10 {
            for c in 0..10 {
                let rephased = Complex64::i().powi(c as i32 - r as i32) * d.get(r, c);
                assert!((rephased - t[r * 10 + c]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn truncated_columns_are_unitary_in_the_lower_half() {
        let n_max = 40;
        let d = build_displacement(n_max, 0.5);
        let dd = d.adjoint().matmul(&d);
        for r in 0..=n_max / 2 {
            for c in 0..=n_max / 2 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((dd.get(r, c) - want).norm() < 1e-8, "{r} {c}");
            }
        }
    }

    #[test]
    fn taylor_series_agrees_at_small_eta() {
        // The dropped orders grow with n; at η = 0.5 the (1,2) element is already 1.05e-6 off.
        let err = |eta: f64, block: usize| {
            let exact = build_displacement(30, eta);
            let series = displacement_taylor(30, eta, 10);
            let mut worst: f64 = 0.0;
            for r in 0..=block {
                for c in 0..=block {
                    worst = worst.max((exact.get(r, c) - series.get(r, c)).norm());
                }
            }
            worst
        };
        assert!(err(0.1, 4) < 1e-12);
        assert!(err(0.3, 4) < 1e-6);
        assert!(err(0.5, 1) < 1e-6);
        assert!(err(0.5, 4) < 2e-5);
    }

    #[test]
    fn large_fock_states_stay_finite() {
        let t = displacement_twisted(300, 0.2);
        assert!(t.iter().all(|v| v.is_finite()));
        let n = 301;
        let col: f64 = (0..n).map(|r| t[r * n + 100].powi(2)).sum();
        assert!((col - 1.0).abs() < 1e-10);
    }
}
