//! Closed-form overlaps, decoherence measures and infidelity budgets.
//!
//! Every ε reported in `leading_order` is the un-clamped leading-order
//! expression. The overlap `chi` is its exponentiated (Gaussian) form, so
//! `epsilon = 1 − |chi|` holds exactly and |χ| ≤ 1 always.

use alloc::vec::Vec;
use num_complex::Complex64;

#[allow(unused_imports)]
use crate::math::Float;
use crate::math::PI;
use crate::units::PhysicalSetup;

/// Leading-order ε above this value is outside the expansion's regime.
pub const VALIDITY_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KickTiming {
    pub tau1: f64,
    pub tau2: f64,
    pub tau_a: f64,
    pub tau_r: f64,
    pub tau_rr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    pub chi: Complex64,
    pub epsilon: f64,
    pub phase: f64,
    pub leading_order: f64,
    pub valid: bool,
}

impl OverlapResult {
    /// χ = sign·e^{iφ}·e^{−x}.
    pub fn gaussian(leading_order: f64, phase: f64, sign: f64) -> Self {
        let chi = Complex64::from_polar(sign * (-leading_order).exp(), phase);
        Self::from_parts(chi, leading_order)
    }

    /// Wrap a numerically obtained overlap; `leading_order` is then 1 − |χ|.
    pub fn from_chi(chi: Complex64) -> Self {
        Self::from_parts(chi, 1.0 - chi.norm())
    }

    fn from_parts(chi: Complex64, leading_order: f64) -> Self {
        Self {
            chi,
            epsilon: 1.0 - chi.norm(),
            phase: chi.arg(),
            leading_order,
            valid: leading_order <= VALIDITY_LIMIT,
        }
    }
}

/// K²τ² k_B T_eff/2M for the axial trap, the common kernel of the free-flight forms.
fn free_flight_eps(setup: &PhysicalSetup, k: f64, tau: f64) -> f64 {
    let teff = setup.effective_temperature(setup.omega_parallel());
    0.5 * k * k * tau * tau * teff * setup.hbar_over_mass()
}

fn kick_k(setup: &PhysicalSetup) -> f64 {
    setup.effective_wavevector().k
}

/// Overlap after a single 2π pulse with Rydberg residence time τ₂, trap off.
pub fn chi_single_2pi(setup: &PhysicalSetup, tau2: f64) -> OverlapResult {
    chi_sudden(setup, kick_k(setup), tau2)
}

/// Overlap after two π pulses separated by τ₁, trap off.
pub fn chi_two_pi(setup: &PhysicalSetup, tau1: f64) -> OverlapResult {
    chi_sudden(setup, kick_k(setup), tau1)
}

fn chi_sudden(setup: &PhysicalSetup, k: f64, tau: f64) -> OverlapResult {
    let e_rec = 0.5 * setup.hbar_over_mass() * k * k;
    OverlapResult::gaussian(free_flight_eps(setup, k, tau), -e_rec * tau, -1.0)
}

/// Two delta kicks separated by τ with the harmonic trap on (leading order in K²).
pub fn eps_ho_trap_on(setup: &PhysicalSetup, tau: f64) -> OverlapResult {
    let w = setup.omega_parallel();
    let k = kick_k(setup);
    let hm = setup.hbar_over_mass();
    let teff = setup.effective_temperature(w);
    let wt = w * tau;
    let eps = k * k * teff * hm / (w * w) * one_minus_cos(wt);
    let phase = -hm * k * k / (2.0 * w) * wt.sin();
    OverlapResult::gaussian(eps, phase, 1.0)
}

/// Exact two-kick overlap for the motional ground state; the setup temperature is ignored.
pub fn chi_ho_ground_exact(setup: &PhysicalSetup, tau: f64) -> OverlapResult {
    let w = setup.omega_parallel();
    let k = kick_k(setup);
    let eta2 = setup.hbar_over_mass() * k * k / (2.0 * w);
    let wt = w * tau;
    OverlapResult::gaussian(eta2 * one_minus_cos(wt), -eta2 * wt.sin(), 1.0)
}

// 1 − cos x without cancellation.
fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Adiabatic-pulse overlap for a precomputed Rydberg time (τ_a, τ_R or τ_R − τ_a).
pub fn eps_adiabatic(setup: &PhysicalSetup, tau_x: f64) -> OverlapResult {
    let k = kick_k(setup);
    let e_rec = 0.5 * setup.hbar_over_mass() * k * k;
    OverlapResult::gaussian(free_flight_eps(setup, k, tau_x), -e_rec * tau_x, 1.0)
}

/// STIRAP ladder with first-step wave number `k1` and second-step `kr` (rad/µm, signed).
pub fn eps_stirap(setup: &PhysicalSetup, k1: f64, kr: f64, tau: f64) -> OverlapResult {
    let dk = k1 - kr;
    let e_rec = 0.5 * setup.hbar_over_mass() * dk * dk;
    OverlapResult::gaussian(free_flight_eps(setup, dk, tau), -e_rec * tau, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusingEstimate {
    pub eps_full: f64,
    pub eps_transverse_only: f64,
    /// The two lines of the full form containing x_R.
    pub axial_terms: f64,
    /// D = k_B T_eff,⊥/(M ω⊥² w0²).
    pub d_param: f64,
}

/// Intensity-variation decoherence from thermal spread across focused beams.
pub fn eps_focusing(setup: &PhysicalSetup) -> FocusingEstimate {
    let g = setup.beam_geometry();
    let hm = setup.hbar_over_mass();
    let (wp, wt) = (setup.omega_parallel(), setup.omega_perp());
    let x2 = setup.effective_temperature(wp) * hm / (wp * wp);
    let y2 = setup.effective_temperature(wt) * hm / (wt * wt);
    let (x0, y0) = (setup.misalign_x0, setup.misalign_y0);
    let (w0, xr) = (g.w0_eff, g.xr_eff);
    let c = 0.5 * PI * PI;
    let line1 = (3.0 * x2 * x2 + 6.0 * x2 * x0 * x0 + x0.powi(4)) / (4.0 * xr.powi(4));
    let line2 = (x2 + x0 * x0) * (2.0 * y2 + y0 * y0) / (xr * xr * w0 * w0);
    let line3 = (8.0 * y2 * y2 + 8.0 * y2 * y0 * y0 + y0.powi(4)) / w0.powi(4);
    let d = y2 / (w0 * w0);
    let r = y0 / w0;
    let transverse = c * r.powi(4) + 4.0 * PI * PI * (r * r * d + d * d);
    FocusingEstimate {
        eps_full: c * (line1 + line2 + line3),
        eps_transverse_only: transverse,
        axial_terms: c * (line1 + line2),
        d_param: d,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseVariation {
    pub wavelength_nm: f64,
    pub gouy_rel: f64,
    pub curvature_rel: f64,
}

/// Cubic Gouy and wavefront-curvature phases relative to Kx at the rms thermal extent, per beam.
pub fn phase_variation_estimates(setup: &PhysicalSetup) -> Vec<PhaseVariation> {
    let sx = setup.thermal_extent(setup.omega_parallel());
    let sy = setup.thermal_extent(setup.omega_perp());
    let y0 = setup.misalign_y0;
    setup
        .beams
        .iter()
        .map(|b| {
            let k = b.wavenumber().abs();
            let xr = b.rayleigh_range();
            let w0 = b.waist_um;
            PhaseVariation {
                wavelength_nm: b.wavelength_nm,
                gouy_rel: sx * sx / (3.0 * xr.powi(3) * k),
                curvature_rel: (2.0 * sy * sy + y0 * y0) / (k * xr * w0 * w0),
            }
        })
        .collect()
}

/// Axial-kick Bell infidelity of the π–2π–π gate, trap off during the pulses.
pub fn infidelity_pi2pipi_kick(setup: &PhysicalSetup, tau1: f64, tau2: f64) -> f64 {
    let c = free_flight_eps(setup, kick_k(setup), 1.0);
    c * (0.5 * tau1 * tau1 + 0.375 * tau2 * tau2)
}

/// Same budget with each ε replaced by its trap-on harmonic-oscillator form.
pub fn infidelity_pi2pipi_trap_on(setup: &PhysicalSetup, tau1: f64, tau2: f64) -> f64 {
    0.5 * eps_ho_trap_on(setup, tau1).leading_order + 0.375 * eps_ho_trap_on(setup, tau2).leading_order
}

/// Radiative Bell infidelity of the π–2π–π gate for decay rate Γ (rad/µs).
pub fn infidelity_radiative(gamma: f64, tau1: f64, tau2: f64) -> f64 {
    gamma * (0.5 * tau1 + 0.25 * tau2)
}

/// Radiative Bell infidelity of the adiabatic gate: Γ(τ_a/2 + τ_R/2).
pub fn infidelity_radiative_adiabatic(gamma: f64, tau_a: f64, tau_r: f64) -> f64 {
    0.5 * gamma * (tau_a + tau_r)
}

/// Axial-kick Bell infidelity of the adiabatic gate.
pub fn infidelity_adiabatic_kick(setup: &PhysicalSetup, tau_a: f64, tau_r: f64) -> f64 {
    let c = free_flight_eps(setup, kick_k(setup), 1.0);
    let d = tau_r - tau_a;
    c * (0.5 * tau_a * tau_a + 0.5 * tau_r * tau_r + 0.25 * d * d)
}

/// Bell infidelity from the transverse Rydberg–Rydberg impulse, T_eff taken at ω⊥.
pub fn infidelity_rydberg_kick(setup: &PhysicalSetup, tau_rr: f64) -> f64 {
    let w = setup.omega_perp();
    let b = setup.blockade_internal();
    let teff = setup.effective_temperature(w);
    27.0 * b * b * teff * setup.hbar_over_mass() * tau_rr * tau_rr / (2.0 * w * w * setup.r12 * setup.r12)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerAsymptotics {
    pub exact: f64,
    pub low_t: f64,
    pub high_t: f64,
    /// High-temperature form without the (ħω/k_BT)²/12 correction.
    pub high_t_leading: f64,
}

/// ε^(1)(τ₁) as a function of bath temperature, exact and in both limits.
pub fn doppler_asymptotics(setup: &PhysicalSetup, tau1: f64) -> DopplerAsymptotics {
    let w = setup.omega_parallel();
    let theta = setup.thermal_angular();
    let k = kick_k(setup);
    let c = k * k * tau1 * tau1 * setup.hbar_over_mass();
    let zero_point = 0.25 * c * w;
    let (exact, low_t) = if theta <= 0.0 {
        (zero_point, zero_point)
    } else {
        let x = w / theta;
        let coth = if x > 700.0 { 1.0 } else { 1.0 / (0.5 * x).tanh() };
        (zero_point * coth, zero_point * (1.0 + 2.0 * (-x).exp()))
    };
    let high_t_leading = 0.5 * c * theta;
    let high_t = if theta <= 0.0 { 0.0 } else { high_t_leading * (1.0 + (w / theta).powi(2) / 12.0) };
    DopplerAsymptotics { exact, low_t, high_t, high_t_leading }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingEstimate {
    /// Energy gain per kick pair, rad/µs.
    pub de_per_kick: f64,
    /// Same, kelvin.
    pub de_per_kick_kelvin: f64,
    /// exp[N(ωτ_off)²/2].
    pub temperature_factor: f64,
    /// T_eff (kelvin) times the factor.
    pub temperature_after: f64,
}

/// Heating from a kick pair and from N trap release/recapture cycles of duration τ_off.
pub fn heating_estimates(setup: &PhysicalSetup, tau1: f64, tau_off: f64, n_gates: u32) -> HeatingEstimate {
    let w = setup.omega_parallel();
    let k = kick_k(setup);
    let e_rec = 0.5 * setup.hbar_over_mass() * k * k;
    let de = e_rec * (w * tau1).powi(2);
    let factor = (f64::from(n_gates) * (w * tau_off).powi(2) / 2.0).exp();
    let teff = crate::UnitSystem::angular_to_kelvin(setup.effective_temperature(w));
    HeatingEstimate {
        de_per_kick: de,
        de_per_kick_kelvin: crate::UnitSystem::angular_to_kelvin(de),
        temperature_factor: factor,
        temperature_after: teff * factor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{Beam, UnitSystem};
    use alloc::vec;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn strontium(t_eff_k: f64) -> PhysicalSetup {
        let mut s = PhysicalSetup::cesium();
        s.mass = crate::units::constants::STRONTIUM_MASS_U;
        s.beams = vec![Beam::new(317.0, 1.0, 2.0)];
        // Classical regime: choose a soft trap so T_eff = T to < 1e-6.
        s.trap_freq_parallel = 1.0;
        s.temperature = t_eff_k;
        s
    }

    #[test]
    fn no_kick_means_no_decoherence() {
        let mut s = PhysicalSetup::cesium();
        s.beams = vec![Beam::new(780.0, 1.0, 2.0), Beam::new(780.0, -1.0, 2.0)];
        let r = chi_single_2pi(&s, 0.3);
        assert_eq!(r.chi, Complex64::new(-1.0, 0.0));
        assert_eq!(r.epsilon, 0.0);
        assert_eq!(eps_ho_trap_on(&s, 1.0).epsilon, 0.0);
    }

    #[test]
    fn sr_worked_example() {
        let s = strontium(0.8e-6);
        assert!(rel(chi_single_2pi(&s, 0.1).leading_order, 1.5e-4) < 0.05);
        assert!(rel(chi_two_pi(&s, 0.3).leading_order, 1.3e-3) < 0.05);
    }

    #[test]
    fn cs_zero_temperature_two_pi() {
        let s = PhysicalSetup::cesium();
        // Oracle: K²τ²ħω/4M evaluated in SI.
        let k = 2.0 * PI * (1.0 / 459e-9 - 1.0 / 1038e-9);
        let m = 132.91 * crate::units::constants::AMU;
        let hbar = crate::units::constants::HBAR;
        let w = 2.0 * PI * 10e3;
        let tau = 1.0044e-6;
        let oracle = k * k * tau * tau * hbar * w / (4.0 * m);
        let r = chi_two_pi(&s, 1.0044);
        assert!(rel(r.leading_order, oracle) < 1e-9);
        assert!(rel(r.leading_order, 4.4e-4) < 0.02);
        assert_eq!(chi_two_pi(&s, 0.0).chi, Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn overlap_identities() {
        let s = PhysicalSetup::cesium();
        let a = chi_single_2pi(&s, 0.11).leading_order;
        let b = chi_two_pi(&s, 0.11).leading_order;
        assert_eq!(a, b);
        assert_eq!(eps_adiabatic(&s, 0.7).leading_order, chi_two_pi(&s, 0.7).leading_order);
        let k = s.effective_wavevector().k;
        assert!(rel(eps_stirap(&s, k, 0.0, 1.0).leading_order, chi_two_pi(&s, 1.0).leading_order) < 1e-14);
        assert_eq!(eps_stirap(&s, k, k, 1.0).epsilon, 0.0);
        let c = infidelity_pi2pipi_kick(&s, 1.0044, 0.11);
        let d = 0.5 * chi_two_pi(&s, 1.0044).leading_order + 0.375 * chi_single_2pi(&s, 0.11).leading_order;
        assert!(rel(c, d) < 1e-14);
        assert!(rel(c, 2.2e-4) < 0.03);
    }

    #[test]
    fn ho_form_limits() {
        let s = PhysicalSetup::cesium();
        let period = 2.0 * PI / s.omega_parallel();
        assert!(eps_ho_trap_on(&s, period).leading_order < 1e-18);
        assert!(chi_ho_ground_exact(&s, 3.0 * period).epsilon.abs() < 1e-15);
        for wt in [0.01, 0.05, 0.1] {
            let tau = wt / s.omega_parallel();
            let ho = eps_ho_trap_on(&s, tau).leading_order;
            let free = chi_two_pi(&s, tau).leading_order;
            let frac = (free - ho) / free;
            assert!(rel(frac, wt * wt / 12.0) < 1e-3, "{wt}: {frac}");
        }
    }

    #[test]
    fn exact_ground_state_matches_ho_form_at_zero_temperature() {
        let s = PhysicalSetup::cesium();
        let exact = chi_ho_ground_exact(&s, 1.0044);
        let lead = eps_ho_trap_on(&s, 1.0044);
        assert!(rel(exact.leading_order, lead.leading_order) < 1e-12);
        // 1 − e^{−x} vs x differ at O(K⁴).
        assert!((exact.epsilon - lead.leading_order).abs() < lead.leading_order.powi(2));
        assert!(rel(exact.epsilon, 4.4e-4) < 0.02);
    }

    #[test]
    fn focusing_simplified_substitution() {
        // D = 0.01 at y0 = 0 needs ⟨y²⟩ = 0.01 w0².
        let mut s = PhysicalSetup::cesium();
        s.beams = vec![Beam::new(459.0, 1.0, 2.0)];
        s.trap_freq_perp = 50e3;
        let w = s.omega_perp();
        let y2 = 0.01 * 4.0;
        let teff = y2 * w * w / s.hbar_over_mass();
        s.temperature = UnitSystem::angular_to_kelvin(crate::units::temperature_for_effective(teff, w).unwrap());
        let f = eps_focusing(&s);
        assert!(rel(f.d_param, 0.01) < 1e-9);
        assert!(rel(f.eps_transverse_only, 3.95e-3) < 1e-3);
    }

    #[test]
    fn focusing_zero_point_survives() {
        let s = PhysicalSetup::cesium();
        let f = eps_focusing(&s);
        assert!(f.eps_full > 0.0 && f.axial_terms > 0.0);
    }

    /// Thermal average of (π²/2)η² by a dense 3-D trapezoid grid over ±9σ.
    fn focusing_oracle(s: &PhysicalSetup) -> f64 {
        let g = s.beam_geometry();
        let hm = s.hbar_over_mass();
        let (wp, wt) = (s.omega_parallel(), s.omega_perp());
        let sx = (s.effective_temperature(wp) * hm).sqrt() / wp;
        let sy = (s.effective_temperature(wt) * hm).sqrt() / wt;
        let n = 91usize;
        let axis = |sig: f64| -> Vec<(f64, f64)> {
            let h = 18.0 * sig / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    let x = -9.0 * sig + h * i as f64;
                    (x, h * (-(x * x) / (2.0 * sig * sig)).exp() / ((2.0 * PI).sqrt() * sig))
                })
                .collect()
        };
        let (ax, ay) = (axis(sx), axis(sy));
        let mut acc = 0.0;
        for &(x, wx) in &ax {
            for &(y, wy) in &ay {
                for &(z, wz) in &ay {
                    let xs = x - s.misalign_x0;
                    let ys = y - s.misalign_y0;
                    let eta = xs * xs / (2.0 * g.xr_eff * g.xr_eff) + (ys * ys + z * z) / (g.w0_eff * g.w0_eff);
                    acc += wx * wy * wz * eta * eta;
                }
            }
        }
        0.5 * PI * PI * acc
    }

    #[test]
    fn focusing_matches_quadrature_oracle() {
        let mut s = PhysicalSetup::cesium();
        s.trap_freq_perp = 50e3;
        s.temperature = 5e-6;
        s.misalign_y0 = 0.1;
        let f = eps_focusing(&s);
        let q = focusing_oracle(&s);
        assert!(rel(f.eps_full, q) < 1e-9, "{} vs {}", f.eps_full, q);
        s.misalign_x0 = 0.4;
        assert!(rel(eps_focusing(&s).eps_full, focusing_oracle(&s)) < 1e-9);
    }

    #[test]
    fn phase_variations() {
        let mut s = PhysicalSetup::cesium();
        s.temperature = 5e-6;
        s.trap_freq_parallel = 20e3;
        s.trap_freq_perp = 20e3;
        let p = phase_variation_estimates(&s);
        // Direct evaluation at the 459 nm beam with the ~140 nm extent.
        assert!(p[0].curvature_rel > 1e-5 && p[0].curvature_rel < 1e-4, "{:?}", p[0]);
        assert!(p[0].gouy_rel < 1e-6);
        s.temperature = 0.0;
        s.trap_freq_parallel = 1e12;
        s.trap_freq_perp = 1e12;
        let p = phase_variation_estimates(&s);
        assert!(p[0].gouy_rel < 1e-12 && p[0].curvature_rel < 1e-10, "{:?}", p[0]);
    }

    #[test]
    fn radiative_levels() {
        let g66 = 1.0 / 130.0;
        let g106 = 1.0 / 366.0;
        assert_eq!(infidelity_radiative(0.0, 1.0, 0.1), 0.0);
        assert!(rel(infidelity_radiative(g66, 1.0044, 0.11), 4.1e-3) < 0.02);
        assert!(rel(infidelity_radiative(g106, 1.0044, 0.11), 1.4e-3) < 0.05);
    }

    #[test]
    fn adiabatic_kick_identities() {
        let mut s = PhysicalSetup::cesium();
        s.trap_freq_parallel = 50e3;
        s.temperature = 5e-6;
        assert_eq!(infidelity_adiabatic_kick(&s, 0.0, 0.0), 0.0);
        let r = infidelity_adiabatic_kick(&s, 1.0, 1.0) / infidelity_pi2pipi_kick(&s, 1.0, 0.0);
        assert!((r - 2.0).abs() < 1e-14);
        assert!(rel(infidelity_adiabatic_kick(&s, 0.357, 0.416), 1.4e-3) < 0.03);
    }

    fn rr_setup(b_mhz: f64, r12: f64) -> PhysicalSetup {
        let mut s = PhysicalSetup::cesium();
        s.trap_freq_perp = 50e3;
        s.blockade = 2.0 * PI * b_mhz * 1e6;
        s.r12 = r12;
        let w = s.omega_perp();
        let teff = UnitSystem::kelvin_to_angular(5e-6);
        s.temperature = UnitSystem::angular_to_kelvin(crate::units::temperature_for_effective(teff, w).unwrap());
        s
    }

    #[test]
    fn rydberg_kick_table() {
        let cases = [
            (600.0, 2.6, 31.6e-6, 9.0e-5),
            (600.0, 5.3, 31.6e-6, 2.2e-5),
            (60.0, 4.2, 8.60e-3, 2.5e-2),
            (60.0, 10.5, 8.60e-3, 4.1e-3),
            (4.0, 8.0, 0.157, 1.0e-2),
            (4.0, 20.0, 0.157, 1.7e-3),
        ];
        for (b, r, t, want) in cases {
            let got = infidelity_rydberg_kick(&rr_setup(b, r), t);
            assert!(rel(got, want) < 0.05, "B={b} r={r}: {got}");
        }
        assert_eq!(infidelity_rydberg_kick(&rr_setup(4.0, 8.0), 0.0), 0.0);
    }

    #[test]
    fn doppler_limits() {
        let mut s = PhysicalSetup::cesium();
        let d0 = doppler_asymptotics(&s, 1.0);
        assert_eq!(d0.exact, d0.low_t);
        let w = s.omega_parallel();
        s.temperature = UnitSystem::angular_to_kelvin(w);
        let d = doppler_asymptotics(&s, 1.0);
        let frac = (d.exact - d.high_t_leading) / d.exact;
        assert!((frac - 0.08).abs() < 0.005, "{frac}");
        assert!(rel(d.high_t, d.exact) < 2e-3);
        s.temperature = UnitSystem::angular_to_kelvin(2.0 * w);
        let d = doppler_asymptotics(&s, 1.0);
        let frac = (d.exact - d.high_t_leading) / d.exact;
        assert!((frac - 0.02).abs() < 0.005, "{frac}");
        // exact equals the T_eff closed form.
        assert!(rel(d.exact, chi_two_pi(&s, 1.0).leading_order) < 1e-12);
    }

    #[test]
    fn heating_per_kick_and_release() {
        let mut s = PhysicalSetup::cesium();
        for (f, want) in [(10e3, 0.42e-9), (20e3, 1.7e-9), (50e3, 11e-9)] {
            s.trap_freq_parallel = f;
            let h = heating_estimates(&s, 1.0, 1.56, 100);
            assert!(rel(h.de_per_kick_kelvin, want) < 0.05, "{f}: {}", h.de_per_kick_kelvin);
        }
        s.trap_freq_parallel = 10e3;
        assert!(rel(heating_estimates(&s, 1.0, 1.56, 100).temperature_factor, 1.62) < 2e-2);
        s.trap_freq_parallel = 20e3;
        assert!(rel(heating_estimates(&s, 1.0, 1.56, 100).temperature_factor, 6.83) < 2e-2);
        s.trap_freq_parallel = 1e-9;
        let h = heating_estimates(&s, 1.0, 1.56, 100);
        assert!(h.de_per_kick < 1e-25 && (h.temperature_factor - 1.0).abs() < 1e-20);
    }
}
