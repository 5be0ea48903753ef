//! Figure tables (`fig3` to `fig8`) and the adiabatic-gate table.

use serde::Serialize;

use rydfid_core::analytic::{
    chi_two_pi, doppler_asymptotics, eps_focusing, infidelity_adiabatic_kick, infidelity_pi2pipi_kick,
    infidelity_pi2pipi_trap_on, infidelity_radiative, infidelity_rydberg_kick,
};
use rydfid_core::protocols::gate::{GateSpec, REFERENCE_GATES, REFERENCE_OMEGA0};
use rydfid_core::protocols::phases::{adiabaticity_margin, cz_phase_defect, propagated_phases};
use rydfid_core::protocols::search::{search_adiabatic_params, SearchOptions};
use rydfid_core::units::temperature_for_effective;
use rydfid_core::vib::integrals::{rr_kick_run, RrOptions};
use rydfid_core::vib::{simulate, simulate_gate, FidelityReport, GateHamiltonian, VibOptions};
use rydfid_core::{PhysicalSetup, UnitSystem};

use crate::budget::{residence_times, Times};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{write_json, write_table, Curve, Meta, Plot, Table};
use crate::par_map;

/// Rydberg lifetimes (µs) of the two reference states.
pub const LIFETIMES: [f64; 2] = [130.0, 366.0];

/// Interatomic separations (µm) of the reference gates for the two Rydberg states.
pub const SEPARATIONS: [[f64; 2]; 3] = [[2.6, 5.3], [4.2, 10.5], [8.0, 20.0]];

pub struct Figure {
    pub stem: &'static str,
    pub table: Table,
    pub plot: Plot,
    pub summary: serde_json::Value,
}

impl Figure {
    pub fn write(&self, dir: &std::path::Path, config_hash: &str) -> Result<Vec<std::path::PathBuf>> {
        let meta = Meta::new(&format!("reproduce {}", self.stem), config_hash);
        let mut files = write_table(dir, self.stem, &self.table, &meta, Some(&self.plot))?;
        let json = dir.join(format!("{}.json", self.stem));
        write_json(&json, &meta, &self.summary)?;
        files.push(json);
        Ok(files)
    }
}

fn curve(y: &str, title: &str) -> Curve {
    Curve { y: y.into(), title: title.into(), filter: None }
}

fn filtered(y: &str, title: &str, col: &str, v: f64) -> Curve {
    Curve { y: y.into(), title: title.into(), filter: Some((col.into(), v)) }
}

fn sim(setup: &PhysicalSetup, spec: &GateSpec, opts: &VibOptions, point: &str) -> Result<FidelityReport> {
    simulate_gate(setup, spec, opts).map_err(|e| CliError::solver(point, e))
}

fn times_pi(setup: &PhysicalSetup, spec: &GateSpec, opts: &VibOptions) -> Result<(f64, f64)> {
    match residence_times(setup, spec, &opts.tol).map_err(|e| CliError::solver("residence times", e))? {
        Times::PiTwoPiPi { tau1, tau2 } => Ok((tau1, tau2)),
        Times::Adiabatic { .. } => Err(CliError::Config("this figure needs the pi-2pi-pi gate".into())),
    }
}

fn pi_gate(base: &Config) -> GateSpec {
    match base.gate_spec() {
        Ok(s @ GateSpec::PiTwoPiPi { .. }) => s,
        _ => GateSpec::pi_2pi_pi_default(),
    }
}

fn radiative_lines(tau1: f64, tau2: f64) -> [f64; 2] {
    LIFETIMES.map(|l| infidelity_radiative(1.0 / l, tau1, tau2))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b) / b
}

/// Axial-kick infidelity of the π–2π–π gate against trap frequency at T = 0, magic trap, no decay.
pub fn fig3(base: &Config, freqs_hz: &[f64], jobs: usize) -> Result<Figure> {
    let spec = pi_gate(base);
    let opts = VibOptions { radiative: false, ..base.vib_options() };
    let setup0 = PhysicalSetup { temperature: 0.0, trap_on: true, ..base.setup() };
    let (tau1, tau2) = times_pi(&setup0, &spec, &opts)?;
    let rows = par_map(jobs, freqs_hz, |&f| -> Result<Vec<f64>> {
        let s = PhysicalSetup { trap_freq_parallel: f, ..setup0.clone() };
        let label = format!("f_parallel = {f} Hz");
        let full = sim(&s, &spec, &opts, &label)?;
        let flat = sim(&s, &spec, &VibOptions { kicks: false, ..opts }, &label)?;
        let kick = full.infidelity() - flat.infidelity();
        let ho = infidelity_pi2pipi_trap_on(&s, tau1, tau2);
        let free = infidelity_pi2pipi_kick(&s, tau1, tau2);
        let [r66, r106] = radiative_lines(tau1, tau2);
        Ok(vec![
            f * 1e-3,
            full.infidelity(),
            flat.infidelity(),
            kick,
            ho,
            free,
            rel(kick, ho),
            rel(free, ho),
            full.convergence.n_max[0] as f64,
            r66,
            r106,
        ])
    });
    let mut table = Table::new(&[
        ("f_parallel_kHz", "axial trap frequency (kHz)"),
        ("infid_full", "1 - F, full dynamics with kicks"),
        ("infid_no_kick", "1 - F with K = 0 (blockade leakage only)"),
        ("infid_kick", "infid_full - infid_no_kick"),
        ("pred_trap_on", "eps_HO(tau1)/2 + 3 eps_HO(tau2)/8"),
        ("pred_trap_off", "eps(tau1)/2 + 3 eps(tau2)/8, free flight"),
        ("rel_diff_trap_on", "infid_kick / pred_trap_on - 1"),
        ("rel_diff_trap_off", "pred_trap_off / pred_trap_on - 1"),
        ("n_max", "highest Fock state used"),
        ("radiative_130us", "radiative 1 - F for a 130 us lifetime"),
        ("radiative_366us", "radiative 1 - F for a 366 us lifetime"),
    ]);
    table.note(format!("T = 0, magic trap on, no decay; tau1 = {tau1} us, tau2 = {tau2:.6} us (integral of P_R)"));
    for r in rows {
        table.push(r?);
    }
    let plot = Plot {
        title: "Axial kick infidelity, ground state".into(),
        x: "f_parallel_kHz".into(),
        xlabel: "f (kHz)".into(),
        ylabel: "1 - F".into(),
        logx: false,
        logy: false,
        curves: vec![
            curve("infid_kick", "full dynamics"),
            curve("pred_trap_off", "trap off"),
            curve("pred_trap_on", "trap on"),
            curve("radiative_130us", "66S lifetime"),
            curve("radiative_366us", "106S lifetime"),
        ],
    };
    let summary = serde_json::json!({ "tau1_us": tau1, "tau2_us": tau2, "rows": table.rows.len() });
    Ok(Figure { stem: "fig3", table, plot, summary })
}

/// Infidelity at fixed n_max values for the Fig-3 settings at one trap frequency.
pub fn fig3_convergence(base: &Config, f_hz: f64, n_values: &[usize], jobs: usize) -> Result<Vec<f64>> {
    let spec = pi_gate(base);
    let s = PhysicalSetup { temperature: 0.0, trap_on: true, trap_freq_parallel: f_hz, ..base.setup() };
    let r = par_map(jobs, n_values, |&n| {
        let opts = VibOptions { radiative: false, n_max: Some(n), ..base.vib_options() };
        sim(&s, &spec, &opts, &format!("n_max = {n}")).map(|r| r.infidelity())
    });
    r.into_iter().collect()
}

/// Temperature grid (K) of the thermal figure; the softest trap stops at 1.5 µK.
pub fn fig4_points(quick: bool) -> Vec<(f64, f64)> {
    let temps: &[f64] = if quick { &[0.5e-6, 1.5e-6, 5e-6] } else { &[0.1e-6, 0.25e-6, 0.5e-6, 1e-6, 1.5e-6, 2e-6, 3e-6, 4e-6, 5e-6] };
    let freqs: &[f64] = if quick { &[50e3] } else { &[10e3, 20e3, 50e3] };
    let mut out = Vec::new();
    for &f in freqs {
        for &t in temps {
            if f < 15e3 && t > 1.5e-6 {
                continue;
            }
            out.push((f, t));
        }
    }
    out
}

/// Thermal axial-kick infidelity of the π–2π–π gate against temperature, trap on, no decay.
pub fn fig4(base: &Config, points: &[(f64, f64)], jobs: usize) -> Result<Figure> {
    let spec = pi_gate(base);
    let opts = VibOptions { radiative: false, ..base.vib_options() };
    let setup0 = PhysicalSetup { trap_on: true, ..base.setup() };
    let (tau1, tau2) = times_pi(&setup0, &spec, &opts)?;
    let flat = sim(&setup0, &spec, &VibOptions { kicks: false, ..opts }, "K = 0 baseline")?.infidelity();
    let rows = par_map(jobs, points, |&(f, t)| -> Result<Vec<f64>> {
        let s = PhysicalSetup { trap_freq_parallel: f, temperature: t, ..setup0.clone() };
        let full = sim(&s, &spec, &opts, &format!("f = {f} Hz, T = {t} K"))?;
        let kick = full.infidelity() - flat;
        let coth = infidelity_pi2pipi_kick(&s, tau1, tau2);
        let ho = infidelity_pi2pipi_trap_on(&s, tau1, tau2);
        let high = 0.5 * doppler_asymptotics(&s, tau1).high_t_leading + 0.375 * doppler_asymptotics(&s, tau2).high_t_leading;
        let [r66, r106] = radiative_lines(tau1, tau2);
        Ok(vec![f * 1e-3, t * 1e6, full.infidelity(), kick, coth, ho, high, rel(kick, coth), full.convergence.n_max[0] as f64, r66, r106])
    });
    let mut table = Table::new(&[
        ("f_parallel_kHz", "axial trap frequency (kHz)"),
        ("T_uK", "temperature (uK)"),
        ("infid_full", "1 - F, full dynamics"),
        ("infid_kick", "infid_full minus the K = 0 value"),
        ("pred_coth", "closed form with K^2 tau^2 k_B T_eff / 2M"),
        ("pred_trap_on", "harmonic-oscillator form at T_eff"),
        ("pred_high_t", "high-temperature form, correction dropped"),
        ("rel_diff_coth", "infid_kick / pred_coth - 1"),
        ("n_max", "highest Fock state used"),
        ("radiative_130us", "radiative 1 - F for a 130 us lifetime"),
        ("radiative_366us", "radiative 1 - F for a 366 us lifetime"),
    ]);
    table.note(format!("magic trap on, no decay; K = 0 baseline {flat:.6e}; tau1 = {tau1} us, tau2 = {tau2:.6} us"));
    for r in rows {
        table.push(r?);
    }
    let mut curves = Vec::new();
    for f in [10.0, 20.0, 50.0] {
        curves.push(filtered("infid_kick", &format!("{f} kHz full"), "f_parallel_kHz", f));
        curves.push(filtered("pred_coth", &format!("{f} kHz closed form"), "f_parallel_kHz", f));
    }
    curves.push(filtered("pred_high_t", "high T", "f_parallel_kHz", 50.0));
    let plot = Plot {
        title: "Thermal axial kick infidelity".into(),
        x: "T_uK".into(),
        xlabel: "T (uK)".into(),
        ylabel: "1 - F".into(),
        logx: false,
        logy: false,
        curves,
    };
    let summary = serde_json::json!({ "tau1_us": tau1, "tau2_us": tau2, "no_kick_baseline": flat });
    Ok(Figure { stem: "fig4", table, plot, summary })
}

/// ε^(1) against the π-pulse separation at 10 kHz from the closed form only.
pub fn fig5(base: &Config) -> Result<Figure> {
    let setup0 = PhysicalSetup { trap_freq_parallel: 10e3, ..base.setup() };
    let mut table = Table::new(&[
        ("tau1_us", "separation of the pi pulses (us)"),
        ("eps_2uK", "eps at 2 uK"),
        ("eps_5uK", "eps at 5 uK"),
        ("eps_10uK", "eps at 10 uK"),
        ("gamma_tau_130us", "Gamma tau1 for a 130 us lifetime"),
        ("gamma_tau_366us", "Gamma tau1 for a 366 us lifetime"),
    ]);
    table.note("analytic only: closed-form eps at the effective temperature, 10 kHz axial trap");
    for i in 0..=40 {
        let tau = 0.05 * f64::from(i);
        let mut row = vec![tau];
        for t in [2e-6, 5e-6, 10e-6] {
            let s = PhysicalSetup { temperature: t, ..setup0.clone() };
            row.push(chi_two_pi(&s, tau).leading_order);
        }
        row.extend(LIFETIMES.map(|l| tau / l));
        table.push(row);
    }
    let plot = Plot {
        title: "Projection error against pulse separation".into(),
        x: "tau1_us".into(),
        xlabel: "tau1 (us)".into(),
        ylabel: "eps".into(),
        logx: false,
        logy: true,
        curves: vec![
            curve("eps_2uK", "2 uK"),
            curve("eps_5uK", "5 uK"),
            curve("eps_10uK", "10 uK"),
            curve("gamma_tau_130us", "66S"),
            curve("gamma_tau_366us", "106S"),
        ],
    };
    Ok(Figure { stem: "fig5", table, plot, summary: serde_json::json!({ "source": "analytic-models only" }) })
}

fn focusing_setup(base: &Config, f_perp: f64, t: f64, y0: f64) -> PhysicalSetup {
    PhysicalSetup { trap_freq_perp: f_perp, temperature: t, misalign_y0: y0, misalign_x0: 0.0, ..base.setup() }
}

/// Focusing infidelity against temperature at y₀ = 100 nm.
pub fn fig6(base: &Config) -> Result<Figure> {
    let mut table = Table::new(&[
        ("f_perp_kHz", "transverse trap frequency (kHz)"),
        ("T_uK", "temperature (uK)"),
        ("infid_transverse", "focusing 1 - F with the x_R terms dropped"),
        ("infid_full", "focusing 1 - F, full form"),
        ("axial_fraction", "share of the x_R terms in the full form"),
    ]);
    table.note("analytic; y0 = 0.1 um, effective waist from the configured beams");
    for f in [10e3, 20e3, 50e3] {
        for i in 0..=20 {
            let t = 0.5e-6 * f64::from(i);
            let e = eps_focusing(&focusing_setup(base, f, t, 0.1));
            table.push(vec![f * 1e-3, t * 1e6, e.eps_transverse_only, e.eps_full, e.axial_terms / e.eps_full]);
        }
    }
    let curves = [10.0, 20.0, 50.0].iter().map(|&f| filtered("infid_transverse", &format!("{f} kHz"), "f_perp_kHz", f)).collect();
    let plot = Plot {
        title: "Focusing infidelity against temperature".into(),
        x: "T_uK".into(),
        xlabel: "T (uK)".into(),
        ylabel: "1 - F".into(),
        logx: false,
        logy: true,
        curves,
    };
    Ok(Figure { stem: "fig6", table, plot, summary: serde_json::json!({ "source": "analytic-models only" }) })
}

/// Focusing infidelity against the transverse misalignment y₀.
pub fn fig7(base: &Config) -> Result<Figure> {
    let mut table = Table::new(&[
        ("f_perp_kHz", "transverse trap frequency (kHz)"),
        ("T_uK", "temperature (uK)"),
        ("y0_um", "transverse misalignment (um)"),
        ("infid_transverse", "focusing 1 - F with the x_R terms dropped"),
        ("infid_full", "focusing 1 - F, full form"),
    ]);
    table.note("analytic; curves are unscaled");
    let mut curves = Vec::new();
    for t in [1e-6, 5e-6] {
        for f in [10e3, 20e3, 50e3] {
            for i in 0..=25 {
                let y0 = 0.02 * f64::from(i);
                let e = eps_focusing(&focusing_setup(base, f, t, y0));
                table.push(vec![f * 1e-3, t * 1e6, y0, e.eps_transverse_only, e.eps_full]);
            }
        }
    }
    for f in [10.0, 20.0, 50.0] {
        curves.push(filtered("infid_transverse", &format!("{f} kHz"), "f_perp_kHz", f));
    }
    let plot = Plot {
        title: "Focusing infidelity against misalignment".into(),
        x: "y0_um".into(),
        xlabel: "y0 (um)".into(),
        ylabel: "1 - F".into(),
        logx: false,
        logy: true,
        curves,
    };
    Ok(Figure { stem: "fig7", table, plot, summary: serde_json::json!({ "source": "analytic-models only" }) })
}

pub fn fig8_temperatures(quick: bool) -> Vec<f64> {
    if quick {
        vec![0.0, 5e-6]
    } else {
        vec![0.0, 1e-6, 2e-6, 3e-6, 4e-6, 5e-6]
    }
}

/// Gate 3 at 50 kHz against temperature: full dynamics vs the kick estimate plus the intrinsic error.
pub fn fig8(base: &Config, temps: &[f64], jobs: usize) -> Result<Figure> {
    let spec = GateSpec::reference_adiabatic(3);
    let opts = VibOptions { radiative: true, kicks: true, ..base.vib_options() };
    let setup0 = PhysicalSetup { trap_freq_parallel: 50e3, trap_on: true, ..base.setup() };
    let Times::Adiabatic { tau_a, tau_r, .. } = residence_times(&setup0, &spec, &opts.tol).map_err(|e| CliError::solver("residence times", e))? else {
        unreachable!()
    };
    let mut points = Vec::new();
    for l in LIFETIMES {
        for &t in temps {
            points.push((l, t));
        }
    }
    let intrinsic: Vec<f64> = par_map(jobs, &LIFETIMES, |&l| {
        let s = PhysicalSetup { rydberg_lifetime: l, ..setup0.clone() };
        sim(&s, &spec, &VibOptions { kicks: false, ..opts }, "intrinsic").map(|r| r.infidelity())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let rows = par_map(jobs, &points, |&(l, t)| -> Result<Vec<f64>> {
        let s = PhysicalSetup { rydberg_lifetime: l, temperature: t, ..setup0.clone() };
        let full = sim(&s, &spec, &opts, &format!("lifetime = {l} us, T = {t} K"))?;
        let base_err = intrinsic[if l == LIFETIMES[0] { 0 } else { 1 }];
        let kick = infidelity_adiabatic_kick(&s, tau_a, tau_r);
        let pred = kick + base_err;
        Ok(vec![l, t * 1e6, full.infidelity(), base_err, kick, pred, rel(full.infidelity(), pred), full.convergence.n_max[0] as f64])
    });
    let mut table = Table::new(&[
        ("lifetime_us", "Rydberg lifetime (us)"),
        ("T_uK", "temperature (uK)"),
        ("infid_full", "1 - F, full dynamics with kicks and decay"),
        ("infid_intrinsic", "1 - F without kicks (pulse shape, blockade, decay)"),
        ("pred_kick", "closed-form axial-kick term"),
        ("pred_total", "pred_kick + infid_intrinsic"),
        ("rel_diff", "infid_full / pred_total - 1"),
        ("n_max", "highest Fock state used"),
    ]);
    table.note(format!("reference gate 3, 50 kHz axial trap, trap on; tau_a = {tau_a:.6} us, tau_r = {tau_r:.6} us"));
    for r in rows {
        table.push(r?);
    }
    let plot = Plot {
        title: "Gate 3 infidelity against temperature".into(),
        x: "T_uK".into(),
        xlabel: "T (uK)".into(),
        ylabel: "1 - F".into(),
        logx: false,
        logy: false,
        curves: vec![
            filtered("infid_full", "66S full", "lifetime_us", 130.0),
            filtered("pred_total", "66S estimate", "lifetime_us", 130.0),
            filtered("infid_full", "106S full", "lifetime_us", 366.0),
            filtered("pred_total", "106S estimate", "lifetime_us", 366.0),
        ],
    };
    let summary = serde_json::json!({ "tau_a_us": tau_a, "tau_r_us": tau_r, "intrinsic": intrinsic });
    Ok(Figure { stem: "fig8", table, plot, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct GateRow {
    pub index: usize,
    pub delta_ratio: f64,
    pub dt_us: f64,
    pub blockade_mhz: f64,
    /// Root of the propagated C_Z defect in Δ/Ω₀ with δt held at the tabulated value.
    pub delta_ratio_found: f64,
    pub defect_at_table: f64,
    pub defect_adiabatic_at_table: f64,
    pub margin: f64,
    pub tau_a_ns: f64,
    pub tau_r_ns: f64,
    pub tau_rr_ns: f64,
    /// 1 − F with decay and no kicks for the two lifetimes.
    pub infid_radiative: [f64; 2],
    pub infid_intrinsic: f64,
    pub separations_um: [f64; 2],
    /// Closed-form Rydberg-force infidelity at T_eff = 5 µK, f⊥ = 50 kHz.
    pub rr_analytic: [f64; 2],
    /// Full transverse run at the first separation, when computed.
    pub rr_full: Option<f64>,
}

/// Setup at T_eff = 5 µK for a 50 kHz transverse trap, with the gate's blockade and separation.
pub fn rr_setup(base: &Config, blockade: f64, r12: f64) -> Result<PhysicalSetup> {
    let mut s = PhysicalSetup { trap_freq_perp: 50e3, r12, blockade: UnitSystem::internal_to_per_second(blockade), ..base.setup() };
    let w = s.omega_perp();
    let theta = temperature_for_effective(UnitSystem::kelvin_to_angular(5e-6), w).map_err(|e| CliError::solver("T_eff", e))?;
    s.temperature = UnitSystem::angular_to_kelvin(theta);
    Ok(s)
}

pub fn gate_row(base: &Config, index: usize, full_rr: bool) -> Result<GateRow> {
    let (ratio, dt, b_mhz) = REFERENCE_GATES[index - 1];
    let spec = GateSpec::reference_adiabatic(index);
    let blockade = spec.blockade_or(0.0);
    let opts = base.vib_options();
    let tol = rydfid_core::ode::Tolerances::new(1e-11, 1e-13);
    let label = format!("gate {index}");
    let err = |e| CliError::solver(label.clone(), e);

    let search = SearchOptions { ratio_bounds: (ratio - 0.05, ratio + 0.05), dt_bounds: (dt, dt), grid: (11, 1), ..SearchOptions::default() };
    let found = search_adiabatic_params(blockade, REFERENCE_OMEGA0, &search).map_err(|e| CliError::Search(format!("{label}: {e}")))?;
    let GateSpec::Adiabatic { delta_ratio: found_ratio, .. } = found.spec else { unreachable!() };
    let sched = spec.schedule().map_err(err)?;
    let env = &sched.drives[0];
    let (prop, _) = propagated_phases(env, blockade, &tol).map_err(err)?;
    let adi = rydfid_core::protocols::phases::dynamical_phases(env, blockade).map_err(err)?;

    let setup = base.setup();
    let Times::Adiabatic { tau_a, tau_r, tau_rr } = residence_times(&setup, &spec, &tol).map_err(err)? else { unreachable!() };
    let internal = |gamma: f64| -> Result<f64> {
        let ham = GateHamiltonian::internal_only(gamma, blockade);
        let o = VibOptions { tol, ..opts };
        simulate(&ham, &sched, 0.0, &o).map(|r| r.infidelity()).map_err(err)
    };
    let infid_radiative = [internal(1.0 / LIFETIMES[0])?, internal(1.0 / LIFETIMES[1])?];
    let infid_intrinsic = internal(0.0)?;

    let seps = SEPARATIONS[index - 1];
    let mut rr_analytic = [0.0; 2];
    for (i, r) in seps.iter().enumerate() {
        rr_analytic[i] = infidelity_rydberg_kick(&rr_setup(base, blockade, *r)?, tau_rr);
    }
    let rr_full = if full_rr {
        let s = rr_setup(base, blockade, seps[0])?;
        let o = RrOptions { cutoff: 1e-3, ..RrOptions::default() };
        Some(rr_kick_run(&s, &spec, &o).map_err(err)?.kick_infidelity)
    } else {
        None
    };
    Ok(GateRow {
        index,
        delta_ratio: ratio,
        dt_us: dt,
        blockade_mhz: b_mhz,
        delta_ratio_found: found_ratio,
        defect_at_table: cz_phase_defect(prop.phi01, prop.phi10, prop.phi11),
        defect_adiabatic_at_table: adi.defect,
        margin: adiabaticity_margin(env, env.detuning),
        tau_a_ns: tau_a * 1e3,
        tau_r_ns: tau_r * 1e3,
        tau_rr_ns: tau_rr * 1e3,
        infid_radiative,
        infid_intrinsic,
        separations_um: seps,
        rr_analytic,
        rr_full,
    })
}

/// Reference adiabatic gates: search, residence times, infidelities and Rydberg-force terms.
pub fn table1(base: &Config, full_rr: bool, jobs: usize) -> Result<(Figure, Vec<GateRow>)> {
    let rows: Vec<GateRow> = par_map(jobs, &[1usize, 2, 3], |&i| gate_row(base, i, full_rr && i > 1)).into_iter().collect::<Result<_>>()?;
    let mut table = Table::new(&[
        ("gate", "reference gate index"),
        ("delta_ratio", "tabulated Delta/Omega0"),
        ("dt_us", "tabulated dt (us)"),
        ("blockade_MHz", "B / 2pi (MHz)"),
        ("delta_ratio_found", "search root in Delta/Omega0 at the tabulated dt"),
        ("defect_rad", "propagated C_Z phase defect at the tabulated point (rad)"),
        ("defect_adiabatic_rad", "adiabatic-branch phase defect at the tabulated point (rad)"),
        ("margin", "adiabaticity margin"),
        ("tau_a_ns", "single-atom Rydberg time (ns)"),
        ("tau_r_ns", "two-atom Rydberg time (ns)"),
        ("tau_rr_ns", "double-Rydberg time (ns)"),
        ("infid_130us", "1 - F with decay, lifetime 130 us, no kicks"),
        ("infid_366us", "1 - F with decay, lifetime 366 us, no kicks"),
        ("infid_intrinsic", "1 - F without decay or kicks"),
        ("r12_near_um", "separation for the 66S state (um)"),
        ("r12_far_um", "separation for the 106S state (um)"),
        ("rr_analytic_near", "Rydberg-force 1 - F at T_eff = 5 uK, 50 kHz, near separation"),
        ("rr_analytic_far", "same at the far separation"),
        ("rr_full_near", "full transverse dynamics at the near separation (nan if not run)"),
    ]);
    table.note("Omega0 = 2pi x 17 MHz for all gates");
    for r in &rows {
        table.push(vec![
            r.index as f64,
            r.delta_ratio,
            r.dt_us,
            r.blockade_mhz,
            r.delta_ratio_found,
            r.defect_at_table,
            r.defect_adiabatic_at_table,
            r.margin,
            r.tau_a_ns,
            r.tau_r_ns,
            r.tau_rr_ns,
            r.infid_radiative[0],
            r.infid_radiative[1],
            r.infid_intrinsic,
            r.separations_um[0],
            r.separations_um[1],
            r.rr_analytic[0],
            r.rr_analytic[1],
            r.rr_full.unwrap_or(f64::NAN),
        ]);
    }
    let plot = Plot {
        title: "Reference adiabatic gates".into(),
        x: "gate".into(),
        xlabel: "gate".into(),
        ylabel: "1 - F".into(),
        logx: false,
        logy: true,
        curves: vec![curve("infid_130us", "66S"), curve("infid_366us", "106S"), curve("infid_intrinsic", "no decay")],
    };
    let summary = serde_json::to_value(&rows).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((Figure { stem: "table1", table, plot, summary: serde_json::json!({ "gates": summary }) }, rows))
}

pub const FIGURES: &[&str] = &["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "table1"];

/// Default Fig-3 frequency grid (Hz).
pub fn fig3_freqs(quick: bool) -> Vec<f64> {
    if quick {
        vec![10e3, 200e3]
    } else {
        vec![5e3, 10e3, 20e3, 35e3, 50e3, 75e3, 100e3, 150e3, 200e3]
    }
}

pub fn reproduce(name: &str, base: &Config, quick: bool, jobs: usize) -> Result<Figure> {
    match name {
        "fig3" => fig3(base, &fig3_freqs(quick), jobs),
        "fig4" => fig4(base, &fig4_points(quick), jobs),
        "fig5" => fig5(base),
        "fig6" => fig6(base),
        "fig7" => fig7(base),
        "fig8" => fig8(base, &fig8_temperatures(quick), jobs),
        "table1" => table1(base, !quick, jobs).map(|x| x.0),
        _ => Err(CliError::Config(format!("unknown figure `{name}`; expected one of {}", FIGURES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_figures_have_expected_shape() {
        let c = Config::default();
        let f5 = fig5(&c).unwrap();
        assert_eq!(f5.table.rows.len(), 41);
        // ε grows as τ² and linearly in T_eff.
        let e = f5.table.column("eps_5uK").unwrap();
        assert!((e[40] / e[20] - 4.0).abs() < 1e-9);
        let f7 = fig7(&c).unwrap();
        let y = f7.table.column("infid_transverse").unwrap();
        assert!(y[25] > y[0]);
        assert!(fig6(&c).unwrap().table.rows.iter().all(|r| r[2] > 0.0));
    }

    #[test]
    fn unknown_figure_is_config_error() {
        assert_eq!(reproduce("fig9", &Config::default(), true, 1).err().unwrap().exit_code(), 2);
    }
}
