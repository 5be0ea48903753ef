//! Rydberg residence times and the transverse pair-force run.

use super::engine::{run_sector, AtomOps, GateHamiltonian};
use super::fidelity::{FidelityReport, PhaseMode};
use super::run::{simulate, EngineChoice, VibOptions, EDGE_LIMIT};
use super::thermal::suggested_n_max;
use crate::analytic::infidelity_rydberg_kick;
use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::ode::Tolerances;
use crate::protocols::gate::{GateSpec, Schedule};
use crate::units::{PhysicalSetup, UnitSystem};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RydbergTimes {
    /// ∫P_R dt for one atom driven alone (|10⟩ input).
    pub tau_a: f64,
    /// ½∫(P_R1 + P_R2) dt from |11⟩.
    pub tau_r: f64,
    /// ∫P_RR dt from |11⟩.
    pub tau_rr: f64,
}

/// Population time integrals (µs) from an internal-states-only run without decay.
pub fn rydberg_time_integrals(schedule: &Schedule, blockade: f64, tol: &Tolerances) -> Result<RydbergTimes> {
    let ham = GateHamiltonian::internal_only(0.0, blockade);
    let ops = AtomOps::new(&ham.atoms[0]);
    let (single, _) = run_sector(&ham, [&ops, &ops], schedule, [1, 0], &[(0, 0)], tol)?;
    let (pair, _) = run_sector(&ham, [&ops, &ops], schedule, [1, 1], &[(0, 0)], tol)?;
    let [p1, p2, prr] = pair.rydberg_time[0];
    Ok(RydbergTimes { tau_a: single.rydberg_time[0][0], tau_r: 0.5 * (p1 + p2), tau_rr: prr })
}

/// Residence times of a gate spec with its own (or the setup's) blockade.
pub fn gate_times(setup: &PhysicalSetup, spec: &GateSpec, tol: &Tolerances) -> Result<RydbergTimes> {
    rydberg_time_integrals(&spec.schedule()?, spec.blockade_or(setup.blockade_internal()), tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrOptions {
    pub n_max: Option<usize>,
    pub cutoff: f64,
    pub tol: Tolerances,
    /// σ = ±1 in the pair phase 6σB(y₂ − y₁)τ_RR/r₁₂.
    pub sign: f64,
    pub phase_mode: PhaseMode,
    /// Propagate only the relative coordinate (exact for equal traps).
    pub relative: bool,
}

impl Default for RrOptions {
    fn default() -> Self {
        Self { n_max: None, cutoff: 1e-4, tol: Tolerances::new(1e-10, 1e-12), sign: 1.0, phase_mode: PhaseMode::PerQubit, relative: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrKickReport {
    pub with_gradient: FidelityReport,
    pub without_gradient: FidelityReport,
    /// ℱ(no gradient) − ℱ(gradient).
    pub kick_infidelity: f64,
    pub times: RydbergTimes,
    /// Closed-form estimate at the same setup.
    pub analytic: f64,
}

/// Largest ratio of the thermal position spread to r₁₂ the linearized pair shift accepts.
pub const LINEARIZATION_LIMIT: f64 = 0.1;

/// Gate in the transverse basis at ω⊥ with the pair shift linearized in y₂ − y₁.
pub fn rr_kick_run(setup: &PhysicalSetup, spec: &GateSpec, opts: &RrOptions) -> Result<RrKickReport> {
    setup.validate()?;
    let w = setup.omega_perp();
    let hm = setup.hbar_over_mass();
    let teff = setup.effective_temperature(w);
    let rms = (teff * hm).sqrt() / w;
    if rms / setup.r12 > LINEARIZATION_LIMIT {
        return Err(Error::Linearization { ratio: rms / setup.r12 });
    }
    let schedule = spec.schedule()?;
    let blockade = spec.blockade_or(setup.blockade_internal());
    let times = rydberg_time_integrals(&schedule, blockade, &opts.tol)?;
    let theta = setup.thermal_angular();
    // The pair force acts like a kick of 6Bτ_RR/r₁₂ on each atom.
    let k_eq = 6.0 * blockade * times.tau_rr / setup.r12;
    let scale = if opts.relative { (hm / w).sqrt() } else { (hm / (2.0 * w)).sqrt() };
    let mut n_max = opts.n_max.unwrap_or_else(|| suggested_n_max(theta, w, opts.cutoff, k_eq * scale));
    let vib = |n_max| VibOptions {
        n_max: Some(n_max),
        cutoff: opts.cutoff,
        tol: opts.tol,
        phase_mode: opts.phase_mode,
        engine: EngineChoice::General,
        kicks: false,
        radiative: true,
        blockade: Some(blockade),
    };
    loop {
        let ham = if opts.relative {
            GateHamiltonian::transverse_relative(setup, n_max, blockade, opts.sign)
        } else {
            GateHamiltonian::transverse(setup, n_max, blockade, opts.sign)
        };
        let with_gradient = simulate(&ham, &schedule, theta, &vib(n_max))?;
        let done = opts.n_max.is_some() || with_gradient.convergence.edge_population <= EDGE_LIMIT || n_max >= 400;
        if done {
            // Without the gradient motion decouples, so one Fock state suffices.
            let mut flat = GateHamiltonian { gradient: None, ..ham };
            flat.atoms.iter_mut().for_each(|a| a.n_max = 0);
            let without_gradient = simulate(&flat, &schedule, 0.0, &vib(0))?;
            let gate_setup = PhysicalSetup { blockade: UnitSystem::internal_to_per_second(blockade), ..setup.clone() };
            return Ok(RrKickReport {
                kick_infidelity: without_gradient.fidelity - with_gradient.fidelity,
                with_gradient,
                without_gradient,
                times,
                analytic: infidelity_rydberg_kick(&gate_setup, times.tau_rr),
            });
        }
        n_max += n_max / 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::envelope::PulseEnvelope;

    #[test]
    fn no_drive_gives_zero_times() {
        let env = PulseEnvelope::zero();
        let s = Schedule { t_start: -1.0, t_end: 1.0, drives: [env.clone(), env] };
        let t = rydberg_time_integrals(&s, 100.0, &Tolerances::default()).unwrap();
        assert_eq!(t, RydbergTimes::default());
    }

    #[test]
    fn single_flat_pulse_time_in_rydberg() {
        // Resonant flat 2π pulse of length T: ∫sin²(Ωt/2) = T/2 for one atom, no partner excitation.
        let t_len = 0.5;
        let env = PulseEnvelope::flat_top(0.0, t_len, 2.0 * crate::math::PI / t_len);
        let s = Schedule { t_start: 0.0, t_end: t_len, drives: [env, PulseEnvelope::zero()] };
        let t = rydberg_time_integrals(&s, 1e3, &Tolerances::new(1e-12, 1e-14)).unwrap();
        assert!((t.tau_a - 0.25).abs() < 1e-10);
        assert!((t.tau_r - 0.125).abs() < 1e-10);
        assert_eq!(t.tau_rr, 0.0);
    }

    #[test]
    fn gradient_free_run_matches_internal_only() {
        let mut s = PhysicalSetup::cesium();
        s.r12 = 8.0;
        s.temperature = 1e-6;
        let spec = GateSpec::reference_adiabatic(3);
        let r = rr_kick_run(&s, &spec, &RrOptions { n_max: Some(3), ..Default::default() }).unwrap();
        let ham = GateHamiltonian::internal_only(s.decay_rate(), spec.blockade_or(0.0));
        let bare = simulate(&ham, &spec.schedule().unwrap(), 0.0, &VibOptions::default()).unwrap();
        assert!((r.without_gradient.fidelity - bare.fidelity).abs() < 1e-10);
        assert!(r.kick_infidelity > 0.0);
    }

    #[test]
    fn linearization_guard() {
        let mut s = PhysicalSetup::cesium();
        s.r12 = 0.2;
        s.temperature = 50e-6;
        let e = rr_kick_run(&s, &GateSpec::reference_adiabatic(3), &RrOptions::default());
        assert!(matches!(e, Err(Error::Linearization { .. })));
    }

    #[test]
    fn relative_coordinate_matches_two_atom_basis() {
        let mut s = PhysicalSetup::cesium();
        s.r12 = 8.0;
        s.temperature = 0.5e-6;
        let spec = GateSpec::reference_adiabatic(3);
        let o = RrOptions { cutoff: 1e-9, n_max: Some(9), ..Default::default() };
        let rel = rr_kick_run(&s, &spec, &RrOptions { n_max: Some(14), ..o }).unwrap();
        let full = rr_kick_run(&s, &spec, &RrOptions { relative: false, ..o }).unwrap();
        let d = (rel.kick_infidelity - full.kick_infidelity).abs();
        assert!(d < 1e-3 * full.kick_infidelity, "{} {}", rel.kick_infidelity, full.kick_infidelity);
        for sign in [1.0, -1.0] {
            let r = rr_kick_run(&s, &spec, &RrOptions { n_max: Some(14), sign, ..o }).unwrap();
            assert!((r.kick_infidelity - rel.kick_infidelity).abs() < 1e-4 * rel.kick_infidelity);
        }
    }

    /// Pulses are short against the trap period, so positions can be frozen: average the
    /// internal-only Gram matrix over the thermal spread of y₂ − y₁ with B → B(1 − 6(y₂ − y₁)/r₁₂).
    fn frozen_position_kick(s: &PhysicalSetup, spec: &GateSpec) -> f64 {
        use crate::vib::fidelity::{bell_fidelity, gate_density_from_gram};
        use crate::vib::run::gram;
        use num_complex::Complex64;
        let w = s.omega_perp();
        let sd = (2.0 * s.effective_temperature(w) * s.hbar_over_mass()).sqrt() / w;
        let b = spec.blockade_or(0.0);
        let sched = spec.schedule().unwrap();
        let opts = VibOptions::default();
        let m = 81;
        let mut acc = [[Complex64::new(0.0, 0.0); 4]; 4];
        let mut wsum = 0.0;
        for i in 0..m {
            let u = -6.0 + 12.0 * i as f64 / (m - 1) as f64;
            let wt = (-0.5 * u * u).exp();
            let ham = GateHamiltonian::internal_only(s.decay_rate(), b * (1.0 - 6.0 * u * sd / s.r12));
            let (g, _) = gram(&ham, &sched, 0.0, &opts).unwrap();
            for x in 0..4 {
                for z in 0..4 {
                    acc[x][z] += g[x][z] * wt;
                }
            }
            wsum += wt;
        }
        acc.iter_mut().flatten().for_each(|v| *v /= wsum);
        let ham = GateHamiltonian::internal_only(s.decay_rate(), b);
        let f0 = simulate(&ham, &sched, 0.0, &opts).unwrap().fidelity;
        f0 - bell_fidelity(&gate_density_from_gram(&acc), PhaseMode::PerQubit).fidelity
    }

    #[test]
    fn matches_frozen_position_average() {
        let mut s = PhysicalSetup::cesium();
        s.r12 = 8.0;
        s.temperature = 3e-6;
        let spec = GateSpec::reference_adiabatic(3);
        let r = rr_kick_run(&s, &spec, &RrOptions { cutoff: 1e-4, ..Default::default() }).unwrap();
        let oracle = frozen_position_kick(&s, &spec);
        // Motion during the ±2 µs window (ωt ≈ 0.3 over the RR exposure) is what the oracle leaves out.
        assert!((r.kick_infidelity / oracle - 1.0).abs() < 0.02, "{} {oracle}", r.kick_infidelity);
    }
}
