use proptest::prelude::*;

use rydfid_core::analytic::{
    chi_ho_ground_exact, chi_single_2pi, chi_two_pi, eps_adiabatic, eps_ho_trap_on, eps_stirap, infidelity_rydberg_kick,
    OverlapResult,
};
use rydfid_core::kspace::{chi_thermal, propagate_two_level, KGrid};
use rydfid_core::ode::Tolerances;
use rydfid_core::protocols::envelope::PulseEnvelope;
use rydfid_core::protocols::gate::{GateSpec, Schedule};
use rydfid_core::protocols::phases::cz_phase_defect;
use rydfid_core::units::{effective_temperature, temperature_for_effective};
use rydfid_core::vib::fidelity::fidelity_at;
use rydfid_core::vib::{evolve_member, simulate, simulate_gate, GateHamiltonian, VibOptions};
use rydfid_core::{Beam, PhysicalSetup, UnitSystem};

use std::f64::consts::{PI, TAU};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn setup_strategy() -> impl Strategy<Value = PhysicalSetup> {
    (
        20.0..250.0f64,
        0.0..2e-5f64,
        1e3..3e5f64,
        1e3..3e5f64,
        250.0..1200.0f64,
        250.0..1200.0f64,
        prop::bool::ANY,
        1.0..5.0f64,
    )
        .prop_map(|(mass, t, fp, ft, l1, l2, counter, w)| {
            let mut s = PhysicalSetup::cesium();
            s.mass = mass;
            s.temperature = t;
            s.trap_freq_parallel = fp;
            s.trap_freq_perp = ft;
            s.beams = vec![Beam::new(l1, 1.0, w), Beam::new(l2, if counter { -1.0 } else { 1.0 }, w)];
            s
        })
}

fn bounded(r: &OverlapResult) -> bool {
    let m = r.chi.norm();
    (0.0..=1.0 + 1e-15).contains(&m) && (-1e-15..=1.0).contains(&r.epsilon)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn effective_temperature_is_monotone(theta in 0.0..50.0f64, d in 0.0..5.0f64, w in 0.01..5.0f64, dw in 0.0..2.0f64) {
        let base = effective_temperature(theta, w);
        prop_assert!(effective_temperature(theta + d, w) >= base);
        prop_assert!(effective_temperature(theta, w + dw) >= base);
        prop_assert_eq!(effective_temperature(0.0, w), 0.5 * w);
        prop_assert!(base >= 0.5 * w && base >= theta);
    }

    #[test]
    fn derived_quantities_are_pure(s in setup_strategy()) {
        prop_assert_eq!(s.effective_wavevector(), s.effective_wavevector());
        prop_assert_eq!(s.beam_geometry(), s.beam_geometry());
        let w = s.omega_parallel();
        prop_assert_eq!(s.effective_temperature(w).to_bits(), s.effective_temperature(w).to_bits());
    }

    #[test]
    fn si_round_trip(x in 1e-9..1e9f64) {
        prop_assert!(rel(UnitSystem::angular_to_kelvin(UnitSystem::kelvin_to_angular(x)), x) < 1e-12);
        prop_assert!(rel(UnitSystem::angular_to_hz(UnitSystem::hz_to_angular(x)), x) < 1e-12);
        prop_assert!(rel(UnitSystem::internal_to_seconds(UnitSystem::seconds_to_internal(x)), x) < 1e-12);
    }

    #[test]
    fn overlaps_are_bounded(s in setup_strategy(), tau in 0.0..3.0f64, k1 in -20.0..20.0f64, kr in -20.0..20.0f64) {
        for r in [
            chi_single_2pi(&s, tau),
            chi_two_pi(&s, tau),
            eps_ho_trap_on(&s, tau),
            chi_ho_ground_exact(&s, tau),
            eps_adiabatic(&s, tau),
            eps_stirap(&s, k1, kr, tau),
        ] {
            prop_assert!(bounded(&r), "{:?}", r);
        }
    }

    #[test]
    fn decoherence_scaling_laws(s in setup_strategy(), tau in 0.01..2.0f64, c in 0.3..3.0f64) {
        let base = chi_two_pi(&s, tau).leading_order;
        prop_assume!(base > 0.0);
        prop_assert!(rel(chi_two_pi(&s, c * tau).leading_order, c * c * base) < 1e-12);

        // K → cK by shortening every wavelength.
        let mut k = s.clone();
        k.beams.iter_mut().for_each(|b| b.wavelength_nm /= c);
        prop_assert!(rel(chi_two_pi(&k, tau).leading_order, c * c * base) < 1e-10);

        // At fixed T_eff, ε ∝ 1/M; T_eff depends on M only through ω, so keep T = 0 and ω fixed.
        let mut m = s.clone();
        m.temperature = 0.0;
        let b0 = chi_two_pi(&m, tau).leading_order;
        m.mass *= c;
        prop_assert!(rel(chi_two_pi(&m, tau).leading_order, b0 / c) < 1e-12);
    }

    #[test]
    fn decoherence_is_linear_in_effective_temperature(s in setup_strategy(), tau in 0.01..2.0f64, a in 0.6..3.0f64, c in 1.0..4.0f64) {
        let w = s.omega_parallel();
        let at = |x: f64| {
            let mut t = s.clone();
            t.temperature = UnitSystem::angular_to_kelvin(temperature_for_effective(x * w, w).unwrap());
            (chi_two_pi(&t, tau).leading_order, t.effective_temperature(w))
        };
        let (e0, t0) = at(a);
        let (e1, t1) = at(a * c);
        prop_assert!(rel(e1 / e0, t1 / t0) < 1e-9);
        prop_assert!(rel(t1 / t0, c) < 1e-6);
    }

    #[test]
    fn rydberg_kick_pairs_blockade_with_time(s in setup_strategy(), tau in 1e-4..0.5f64, c in 0.1..10.0f64) {
        let a = infidelity_rydberg_kick(&s, tau);
        let mut t = s.clone();
        t.blockade *= c;
        prop_assert!(rel(infidelity_rydberg_kick(&t, tau / c), a) < 1e-12);
    }

    #[test]
    fn phase_defect_is_periodic_and_bounded(a in -10.0..10.0f64, b in -10.0..10.0f64, c in -10.0..10.0f64, n in -3i32..3) {
        let d = cz_phase_defect(a, b, c);
        prop_assert!((0.0..=PI + 1e-12).contains(&d));
        let shift = TAU * f64::from(n);
        prop_assert!((cz_phase_defect(a + shift, b, c) - d).abs() < 1e-9);
        prop_assert!((cz_phase_defect(a, b, c + shift) - d).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn kspace_unitarity_per_k(area in 0.5..3.0f64, width in 0.05..0.5f64, detuning in -5.0..5.0f64) {
        let s = PhysicalSetup::cesium();
        let k = s.effective_wavevector().k;
        let w = s.omega_parallel();
        let env = PulseEnvelope::flat_top(0.0, width, area * PI / width).with_detuning(detuning);
        let grid = KGrid::for_setup(&s, w, k, 64).unwrap();
        let ker = propagate_two_level(&grid, &env, k, &s, 0.0, width, &Tolerances::new(1e-12, 1e-14)).unwrap();
        for (v, r) in ker.values.iter().zip(&ker.residual) {
            prop_assert!((v.norm_sqr() + r - 1.0).abs() < 1e-10);
        }
        let chi = chi_thermal(&ker, &s, w).unwrap();
        prop_assert!(chi.chi.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn norm_ledger_holds_per_member(n1 in 0usize..3, n2 in 0usize..3, trap in prop::bool::ANY, lifetime in 0.5..200.0f64) {
        let mut s = PhysicalSetup::cesium();
        s.trap_freq_parallel = 100e3;
        s.trap_on = trap;
        s.rydberg_lifetime = lifetime;
        let spec = GateSpec::pi_2pi_pi_default();
        let ham = GateHamiltonian::axial(&s, 5, s.blockade_internal());
        let st = evolve_member(&ham, &spec.schedule().unwrap(), n1, n2, 1.0, &Tolerances::new(1e-11, 1e-13)).unwrap();
        prop_assert!((st.norm_sqr() + st.loss - 1.0).abs() < 1e-9, "{} {}", st.norm_sqr(), st.loss);
    }

    #[test]
    fn optimized_phases_beat_zero_phases(t in 0.0..1.5e-6f64, f in 20e3..100e3f64) {
        let mut s = PhysicalSetup::cesium();
        s.temperature = t;
        s.trap_freq_parallel = f;
        let spec = GateSpec::pi_2pi_pi_default();
        let r = simulate_gate(&s, &spec, &VibOptions { cutoff: 1e-2, radiative: false, ..Default::default() }).unwrap();
        prop_assert!(r.fidelity <= 1.0 + 1e-12);
        prop_assert!(r.fidelity + 1e-12 >= fidelity_at(&r.gate_rho, 0.0, 0.0));
        // Only axial kicks act, so ρ₁₁₁₁ moves from 1/2 at second order.
        prop_assert!((r.rho1111 - 0.5).abs() < 1e-4, "{}", r.rho1111);
    }
}

#[test]
fn error_free_gate_is_ideal() {
    let mut s = PhysicalSetup::cesium();
    s.beams = vec![Beam::new(780.0, 1.0, 2.0), Beam::new(780.0, -1.0, 2.0)];
    // Blockade far above the pulse bandwidth so the |RR⟩ leak is negligible.
    let ham = GateHamiltonian::axial(&s, 2, TAU * 2e4);
    let ham = GateHamiltonian { gamma: 0.0, ..ham };
    let r = simulate(&ham, &GateSpec::pi_2pi_pi_default().schedule().unwrap(), 0.0, &VibOptions::default()).unwrap();
    assert!(r.infidelity() < 1e-8, "{}", r.infidelity());
}

#[test]
fn basis_refinement_is_stable() {
    let mut s = PhysicalSetup::cesium();
    s.trap_freq_parallel = 50e3;
    s.temperature = 2e-6;
    let sched = GateSpec::pi_2pi_pi_default().schedule().unwrap();
    let opts = VibOptions { cutoff: 1e-4, radiative: false, ..Default::default() };
    let run = |n| {
        let ham = GateHamiltonian { gamma: 0.0, ..GateHamiltonian::axial(&s, n, s.blockade_internal()) };
        simulate(&ham, &sched, s.thermal_angular(), &VibOptions { n_max: Some(n), ..opts }).unwrap().fidelity
    };
    let (a, b) = (run(24), run(48));
    assert!((a - b).abs() < 1e-6, "{a} {b}");
}

#[test]
fn flat_schedule_leaves_motion_untouched() {
    let s = PhysicalSetup::cesium();
    let env = PulseEnvelope::zero();
    let sched = Schedule { t_start: 0.0, t_end: 1.0, drives: [env.clone(), env] };
    let ham = GateHamiltonian::axial(&s, 4, s.blockade_internal());
    let st = evolve_member(&ham, &sched, 2, 1, 1.0, &Tolerances::default()).unwrap();
    assert!((st.norm_sqr() - 1.0).abs() < 1e-12 && st.loss == 0.0);
}
