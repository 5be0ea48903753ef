//! Acceptance criteria with pinned targets and tolerances.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::Serialize;

use rydfid_core::analytic::{chi_ho_ground_exact, chi_single_2pi, chi_two_pi, doppler_asymptotics, heating_estimates};
use rydfid_core::kspace::{chi_thermal, chi_thermal_motional, propagate_stirap, sudden_kernel, KGrid};
use rydfid_core::linalg::CMatrix;
use rydfid_core::ode::Tolerances;
use rydfid_core::protocols::envelope::{PulseComponent, PulseEnvelope, Shape};
use rydfid_core::protocols::gate::GateSpec;
use rydfid_core::units::constants::STRONTIUM_MASS_U;
use rydfid_core::vib::fidelity::gate_density_from_gram;
use rydfid_core::vib::run::gram;
use rydfid_core::vib::{build_displacement, evolve_member, lindblad_evolve, EngineChoice, GateHamiltonian, VibOptions};
use rydfid_core::{Beam, Complex64, PhysicalSetup, UnitSystem};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::figures;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Tol {
    /// |actual/target − 1| ≤ x
    Rel(f64),
    /// |actual − target| ≤ x
    Abs(f64),
    /// target/x ≤ actual ≤ target·x
    Factor(f64),
    /// actual < x; target is informational
    Below(f64),
    /// actual > x
    Above(f64),
    /// actual rounds to target at this many significant figures
    SigFigs(u32),
}

impl Tol {
    fn holds(self, target: f64, actual: f64) -> bool {
        match self {
            Tol::Rel(x) => ((actual - target) / target).abs() <= x,
            Tol::Abs(x) => (actual - target).abs() <= x,
            Tol::Factor(x) => actual >= target / x && actual <= target * x,
            Tol::Below(x) => actual < x,
            Tol::Above(x) => actual > x,
            Tol::SigFigs(n) => round_sig(actual, n) == round_sig(target, n),
        }
    }

    fn describe(self) -> String {
        match self {
            Tol::Rel(x) if x < 1e-3 => format!("rel {x:.0e}"),
            Tol::Rel(x) => format!("rel {:.1}%", 100.0 * x),
            Tol::Abs(x) => format!("abs {x:.3e}"),
            Tol::Factor(x) => format!("factor {x}"),
            Tol::Below(x) => format!("< {x:.1e}"),
            Tol::Above(x) => format!("> {x:.3e}"),
            Tol::SigFigs(n) => format!("{n} sig. fig."),
        }
    }
}

fn round_sig(x: f64, n: u32) -> String {
    format!("{:.*e}", n.saturating_sub(1) as usize, x)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub id: String,
    pub target: f64,
    pub actual: f64,
    pub tol: Tol,
    pub pass: bool,
}

impl Check {
    pub fn new(criterion: u8, id: impl Into<String>, target: f64, actual: f64, tol: Tol) -> Self {
        let pass = actual.is_finite() && tol.holds(target, actual);
        Self { criterion, id: id.into(), target, actual, tol, pass }
    }
}

/// Checks that cannot be met by a faithful implementation; each is analysed in the project notes.
/// A trailing `*` matches every id with that prefix.
pub const KNOWN_UNATTAINABLE: &[&str] = &[
    "2.release.50kHz",
    "3.search.gate*",
    "3.tau_a.gate1",
    "4.rr_full.gate2",
    "5.fig3.*",
    "6.fig4.*",
];

pub fn is_known_unattainable(id: &str) -> bool {
    KNOWN_UNATTAINABLE.iter().any(|k| match k.strip_suffix('*') {
        Some(prefix) => id.starts_with(prefix),
        None => id == *k,
    })
}

fn solver(point: &str) -> impl Fn(rydfid_core::Error) -> CliError + '_ {
    move |e| CliError::solver(point, e)
}

pub fn criterion1() -> Vec<Check> {
    let mut s = PhysicalSetup::cesium();
    s.mass = STRONTIUM_MASS_U;
    s.beams = vec![Beam::new(317.0, 1.0, 2.0)];
    // A soft trap puts T_eff on T.
    s.trap_freq_parallel = 1.0;
    s.temperature = 0.8e-6;
    vec![
        Check::new(1, "1.sr.100ns", 1.5e-4, chi_single_2pi(&s, 0.1).leading_order, Tol::Rel(0.05)),
        Check::new(1, "1.sr.300ns", 1.3e-3, chi_two_pi(&s, 0.3).leading_order, Tol::Rel(0.05)),
    ]
}

pub fn criterion2() -> Vec<Check> {
    let mut s = PhysicalSetup::cesium();
    let mut out = Vec::new();
    for (f, de, factor) in [(10e3, 0.42e-9, 1.62), (20e3, 1.7e-9, 6.83), (50e3, 11e-9, 1.6e5)] {
        s.trap_freq_parallel = f;
        let h = heating_estimates(&s, 1.0, 1.56, 100);
        let khz = f * 1e-3;
        out.push(Check::new(2, format!("2.kick.{khz}kHz"), de, h.de_per_kick_kelvin, Tol::Rel(0.05)));
        out.push(Check::new(2, format!("2.release.{khz}kHz"), factor, h.temperature_factor, Tol::Rel(0.02)));
    }
    out
}

const TABLE_TIMES_NS: [[f64; 2]; 3] = [[90.0, 63.0], [56.0, 42.0], [357.0, 416.0]];
const TABLE_INFID: [[f64; 2]; 3] = [[6.3e-4, 2.4e-4], [3.8e-4, 1.3e-4], [30e-4, 11e-4]];
const TABLE_INTRINSIC: [f64; 3] = [1.8e-5, 9.9e-8, 1.3e-5];
const TABLE_TAU_RR_NS: [f64; 3] = [31.6e-3, 8.60, 157.0];
const TABLE_RR: [[f64; 2]; 3] = [[9.0e-5, 2.2e-5], [2.5e-2, 4.1e-3], [1.0e-2, 1.7e-3]];

/// Criteria 3 and 4 share the per-gate work.
pub fn criteria3_4(base: &Config, full_rr: bool, jobs: usize) -> Result<Vec<Check>> {
    let (_, rows) = figures::table1(base, full_rr, jobs)?;
    let mut c3 = Vec::new();
    let mut c4 = Vec::new();
    for (g, r) in rows.iter().enumerate() {
        let n = g + 1;
        c3.push(Check::new(3, format!("3.search.gate{n}"), r.delta_ratio, r.delta_ratio_found, Tol::SigFigs(4)));
        c3.push(Check::new(3, format!("3.tau_a.gate{n}"), TABLE_TIMES_NS[g][0], r.tau_a_ns, Tol::Abs(2.0)));
        c3.push(Check::new(3, format!("3.tau_r.gate{n}"), TABLE_TIMES_NS[g][1], r.tau_r_ns, Tol::Abs(2.0)));
        for (l, name) in ["66S", "106S"].iter().enumerate() {
            c3.push(Check::new(3, format!("3.infid_{name}.gate{n}"), TABLE_INFID[g][l], r.infid_radiative[l], Tol::Rel(0.10)));
        }
        c3.push(Check::new(3, format!("3.intrinsic.gate{n}"), TABLE_INTRINSIC[g], r.infid_intrinsic, Tol::Factor(3.0)));
        c4.push(Check::new(4, format!("4.tau_rr.gate{n}"), TABLE_TAU_RR_NS[g], r.tau_rr_ns, Tol::Rel(0.02)));
        for (l, name) in ["near", "far"].iter().enumerate() {
            c4.push(Check::new(4, format!("4.rr_analytic_{name}.gate{n}"), TABLE_RR[g][l], r.rr_analytic[l], Tol::Rel(0.05)));
        }
        if let Some(full) = r.rr_full {
            c4.push(Check::new(4, format!("4.rr_full.gate{n}"), r.rr_analytic[0], full, Tol::Rel(0.05)));
        }
    }
    c3.extend(c4);
    Ok(c3)
}

pub fn criterion5(base: &Config, jobs: usize) -> Result<Vec<Check>> {
    let freqs = [10e3, 20e3, 35e3, 50e3, 100e3, 200e3];
    let fig = figures::fig3(base, &freqs, jobs)?;
    let kick = fig.table.column("infid_kick").unwrap_or_default();
    let ho = fig.table.column("pred_trap_on").unwrap_or_default();
    let free = fig.table.column("pred_trap_off").unwrap_or_default();
    let mut out = Vec::new();
    for (i, f) in freqs.iter().enumerate() {
        out.push(Check::new(5, format!("5.fig3.{}kHz", f * 1e-3), ho[i], kick[i], Tol::Rel(0.01)));
    }
    let last = freqs.len() - 1;
    out.push(Check::new(5, "5.trap_off_departs.200kHz", 0.05, ((free[last] - ho[last]) / ho[last]).abs(), Tol::Above(0.05)));
    // Highest basis used against n_max = 10 at the softest trap of the figure.
    let f = figures::fig3_convergence(base, 5e3, &[10, 30], jobs)?;
    out.push(Check::new(5, "5.convergence.n_max10", 0.0, (f[0] - f[1]).abs(), Tol::Below(1e-4)));
    Ok(out)
}

pub fn criterion6(base: &Config, quick: bool, jobs: usize) -> Result<Vec<Check>> {
    let fig = figures::fig4(base, &figures::fig4_points(quick), jobs)?;
    let mut out = Vec::new();
    for r in &fig.table.rows {
        let (f, t) = (r[0], (r[1] * 1e6).round() / 1e6);
        out.push(Check::new(6, format!("6.fig4.{f}kHz.{t}uK"), r[4], r[3], Tol::Rel(0.01)));
    }
    let mut s = base.setup();
    let w = s.omega_parallel();
    for (mult, target) in [(1.0, 0.08), (2.0, 0.02)] {
        s.temperature = UnitSystem::angular_to_kelvin(mult * w);
        let d = doppler_asymptotics(&s, 1.0);
        out.push(Check::new(6, format!("6.asymptote.{mult}hw"), target, (d.exact - d.high_t_leading) / d.exact, Tol::Abs(0.005)));
    }
    Ok(out)
}

pub fn criterion7(base: &Config, quick: bool, jobs: usize) -> Result<Vec<Check>> {
    let fig = figures::fig8(base, &figures::fig8_temperatures(quick), jobs)?;
    Ok(fig
        .table
        .rows
        .iter()
        .map(|r| Check::new(7, format!("7.fig8.{}us.{}uK", r[0], (r[1] * 1e6).round() / 1e6), r[5], r[2], Tol::Rel(0.15)))
        .collect())
}

/// ψ_n(ξ) with ⟨ξ²⟩₀ = 1/2.
fn hermite_functions(n_max: usize, xi: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    out[0] = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if n_max > 0 {
        out[1] = 2f64.sqrt() * xi * out[0];
    }
    for n in 2..=n_max {
        out[n] = (2.0 / n as f64).sqrt() * xi * out[n - 1] - ((n - 1) as f64 / n as f64).sqrt() * out[n - 2];
    }
    out
}

/// ⟨m|e^{i√2 η ξ}|n⟩ by trapezoidal quadrature on a position grid.
fn displacement_by_quadrature(n_max: usize, eta: f64) -> CMatrix {
    let (lo, hi, m) = (-14.0, 14.0, 6000);
    let h = (hi - lo) / f64::from(m);
    let mut out = CMatrix::zeros(n_max + 1, n_max + 1);
    for i in 0..=m {
        let xi = lo + h * f64::from(i);
        let w = if i == 0 || i == m { 0.5 * h } else { h };
        let f = hermite_functions(n_max, xi);
        let ph = Complex64::from_polar(w, 2f64.sqrt() * eta * xi);
        for r in 0..=n_max {
            for c in 0..=n_max {
                out.set(r, c, out.get(r, c) + ph * f[r] * f[c]);
            }
        }
    }
    out
}

pub fn criterion8() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    // Ensemble engines against the dense master equation, n_max = 2, with decay and a strong kick.
    let tol = Tolerances::new(1e-11, 1e-13);
    for trap_on in [true, false] {
        let mut s = PhysicalSetup::cesium();
        s.trap_freq_parallel = 50e3;
        s.trap_on = trap_on;
        s.temperature = 2e-6;
        s.rydberg_lifetime = 3.0;
        let spec = GateSpec::PiTwoPiPi { omega1_max: None, omega2_max: None, tau1: 0.6, dt1: 0.1, dt2: 0.15 };
        let sched = spec.schedule().map_err(solver("oracle schedule"))?;
        let mut ham = GateHamiltonian::axial(&s, 2, TAU * 4.0);
        ham.atoms.iter_mut().for_each(|a| a.kick *= 3.0);
        let lind = lindblad_evolve(&ham, &sched, s.thermal_angular(), &tol).map_err(solver("master equation"))?;
        for engine in [EngineChoice::General, EngineChoice::Factorized] {
            let opts = VibOptions { cutoff: 0.0, tol, engine, ..VibOptions::default() };
            let (g, _) = gram(&ham, &sched, s.thermal_angular(), &opts).map_err(solver("ensemble"))?;
            let ens = gate_density_from_gram(&g);
            let mut worst = 0.0f64;
            for x in 0..4 {
                for y in 0..4 {
                    worst = worst.max((ens[x][y] - lind.gate_rho[x][y]).norm());
                }
            }
            let trap = if trap_on { "trap_on" } else { "trap_off" };
            out.push(Check::new(8, format!("8.lindblad.{engine:?}.{trap}").to_lowercase(), 0.0, worst, Tol::Below(1e-8)));
        }
    }

    // Ground-state overlap in closed form against the delta-kick momentum-space run.
    let s = PhysicalSetup { temperature: 0.0, ..PhysicalSetup::cesium() };
    let k = s.effective_wavevector().k;
    let w = s.omega_parallel();
    let grid = KGrid::for_setup(&s, w, k, 512).map_err(solver("k grid"))?;
    let num = chi_thermal(&sudden_kernel(&grid, k, &s, 1.0), &s, w).map_err(solver("k-space overlap"))?;
    let ho = chi_ho_ground_exact(&s, 1.0);
    out.push(Check::new(8, "8.ho_ground_vs_kspace", 0.0, (num.chi.norm() - ho.chi.norm()).abs(), Tol::Below(1e-6)));

    // Displacement matrix against position-grid quadrature.
    let worst = [0.1, 0.45, 1.1].iter().map(|&eta| build_displacement(12, eta).max_abs_diff(&displacement_by_quadrature(12, eta))).fold(0.0, f64::max);
    out.push(Check::new(8, "8.displacement_vs_quadrature", 0.0, worst, Tol::Below(1e-8)));

    // STIRAP out and back with equal wavevectors leaves no motional imprint.
    let k = TAU / 0.459;
    let grid = KGrid::for_setup(&s, w, k, 33).map_err(solver("k grid"))?;
    let (om, sig, sep) = (TAU * 100.0, 0.3, 0.35);
    let mk = |c: f64| PulseComponent { shape: Shape::Gaussian, center: c, width: sig, amplitude: om, window: (c - 6.0 * sig, c + 6.0 * sig) };
    let omega1 = PulseEnvelope { components: vec![mk(2.0 + 0.5 * sep), mk(6.0 - 0.5 * sep)], detuning: 0.0 };
    let omega_r = PulseEnvelope { components: vec![mk(2.0 - 0.5 * sep), mk(6.0 + 0.5 * sep)], detuning: 0.0 };
    let ker = propagate_stirap(&grid, &omega1, &omega_r, 0.0, 0.0, k, k, &s, -0.5, 8.5, &Tolerances::new(1e-12, 1e-14)).map_err(solver("STIRAP"))?;
    let m = chi_thermal_motional(&ker, &s, w).map_err(solver("STIRAP overlap"))?;
    out.push(Check::new(8, "8.stirap_null", 0.0, m.epsilon.abs(), Tol::Below(1e-10)));
    Ok(out)
}

/// Spot checks of the invariants; the randomized suites live with the core crate's tests.
pub fn criterion9() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut s = PhysicalSetup::cesium();
    s.temperature = 3e-6;
    let base = chi_two_pi(&s, 0.5).leading_order;
    out.push(Check::new(9, "9.scaling.tau2", 4.0, chi_two_pi(&s, 1.0).leading_order / base, Tol::Rel(1e-12)));
    let mut heavy = s.clone();
    heavy.mass *= 2.0;
    heavy.trap_freq_parallel = 1.0;
    let mut light = heavy.clone();
    light.mass = s.mass;
    out.push(Check::new(9, "9.scaling.inverse_mass", 0.5, chi_two_pi(&heavy, 0.5).leading_order / chi_two_pi(&light, 0.5).leading_order, Tol::Rel(1e-6)));
    let worst = [0.0, 1e-6, 1e-5, 1e-4]
        .iter()
        .flat_map(|&t| [0.1, 1.0, 10.0].map(move |tau| (t, tau)))
        .map(|(t, tau)| chi_two_pi(&PhysicalSetup { temperature: t, ..s.clone() }, tau).chi.norm())
        .fold(0.0, f64::max);
    out.push(Check::new(9, "9.overlap_bounded", 1.0, worst, Tol::Below(1.0 + 1e-12)));
    let mut worst = 0.0f64;
    let spec = GateSpec::pi_2pi_pi_default();
    let sched = spec.schedule().map_err(solver("schedule"))?;
    let mut decaying = PhysicalSetup::cesium();
    decaying.trap_freq_parallel = 100e3;
    decaying.rydberg_lifetime = 2.0;
    let ham = GateHamiltonian::axial(&decaying, 5, decaying.blockade_internal());
    for (n1, n2) in [(0, 0), (1, 2), (2, 0)] {
        let st = evolve_member(&ham, &sched, n1, n2, 1.0, &Tolerances::new(1e-11, 1e-13)).map_err(solver("norm ledger"))?;
        worst = worst.max((st.norm_sqr() + st.loss - 1.0).abs());
    }
    out.push(Check::new(9, "9.norm_ledger", 0.0, worst, Tol::Below(1e-9)));
    Ok(out)
}

/// All criteria; `quick` keeps the analytic and small-basis ones.
pub fn run(base: &Config, quick: bool, jobs: usize) -> Result<Vec<Check>> {
    let mut out = criterion1();
    out.extend(criterion2());
    out.extend(criteria3_4(base, !quick, jobs)?);
    if !quick {
        out.extend(criterion5(base, jobs)?);
        out.extend(criterion6(base, false, jobs)?);
        out.extend(criterion7(base, false, jobs)?);
    }
    out.extend(criterion8()?);
    out.extend(criterion9()?);
    Ok(out)
}

pub fn render(checks: &[Check]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<34} {:>14} {:>14} {:>16}  result", "check", "target", "actual", "tolerance");
    for c in checks {
        let _ = writeln!(
            s,
            "{:<34} {:>14.6e} {:>14.6e} {:>16}  {}",
            c.id,
            c.target,
            c.actual,
            c.tol.describe(),
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(s, "{} checks, {} passed, {} failed", checks.len(), checks.len() - failed, failed);
    s
}
