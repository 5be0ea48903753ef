//! `estimate`, `simulate` and `gate-search`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use rydfid_core::protocols::gate::GateSpec;
use rydfid_core::protocols::search::search_adiabatic_params;
use rydfid_core::vib::{simulate_gate, FidelityReport};
use rydfid_core::{Error, UnitSystem};

use crate::budget::{axial_prediction, budget, columns, residence_times, Times};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{write_json, write_table, Meta, Table};
use crate::par_map;

fn describe(point: &[(String, f64)]) -> String {
    if point.is_empty() {
        return "the base configuration".into();
    }
    point.iter().map(|(k, v)| format!("{k} = {v:e}")).collect::<Vec<_>>().join(", ")
}

fn scan_columns(config: &Config) -> Vec<(String, String)> {
    config.scan.iter().map(|a| (a.variable.clone(), "scan variable".to_string())).collect()
}

fn table_with(scan: &[(String, String)], rest: &[(&str, &str)]) -> Table {
    let mut cols: Vec<(&str, &str)> = scan.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    cols.extend_from_slice(rest);
    Table::new(&cols)
}

/// Closed-form budget per scan point.
pub fn estimate(config: &Config, jobs: usize) -> Result<Table> {
    let points = config.scan_points()?;
    let spec = config.gate_spec()?;
    let tol = config.tolerances();
    let rows = par_map(jobs, &points, |p| -> Result<Vec<f64>> {
        let c = config.at(p)?;
        let setup = c.setup();
        let spec = c.gate_spec()?;
        let times = residence_times(&setup, &spec, &tol).map_err(|e| CliError::solver(describe(p), e))?;
        let mut row: Vec<f64> = p.iter().map(|x| x.1).collect();
        row.extend(budget(&setup, &spec, &times));
        Ok(row)
    });
    let mut table = table_with(&scan_columns(config), columns(&spec));
    table.note("closed-form estimates; angular inputs in rad/s, times in us");
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}

#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub point: Vec<(String, f64)>,
    pub fidelity: f64,
    pub infidelity: f64,
    pub theta: [f64; 2],
    pub rho0000: f64,
    pub rho1111: f64,
    pub rho0011: [f64; 2],
    pub n_max: [usize; 2],
    pub members: usize,
    pub edge_population: f64,
    pub norm_residual: f64,
    pub predicted_kick: f64,
    pub predicted_radiative: f64,
}

impl PointReport {
    fn new(point: &[(String, f64)], r: &FidelityReport, kick: f64, rad: f64) -> Self {
        Self {
            point: point.to_vec(),
            fidelity: r.fidelity,
            infidelity: r.infidelity(),
            theta: r.theta,
            rho0000: r.rho0000,
            rho1111: r.rho1111,
            rho0011: [r.rho0011.re, r.rho0011.im],
            n_max: r.convergence.n_max,
            members: r.convergence.members,
            edge_population: r.convergence.edge_population,
            norm_residual: r.convergence.norm_residual,
            predicted_kick: kick,
            predicted_radiative: rad,
        }
    }
}

const SIM_COLUMNS: &[(&str, &str)] = &[
    ("fidelity", "Bell fidelity from the full motional dynamics"),
    ("infidelity", "1 - fidelity"),
    ("pred_kick", "closed-form axial-kick infidelity"),
    ("pred_radiative", "closed-form radiative infidelity (0 when decay is off)"),
    ("pred_total", "pred_kick + pred_radiative"),
    ("n_max", "highest Fock state per atom"),
    ("members", "thermal ensemble members"),
    ("edge_population", "largest population in the top two Fock states"),
    ("norm_residual", "largest |norm + loss - 1| over members"),
];

/// Full-dynamics fidelity per scan point with the closed-form prediction alongside.
pub fn simulate(config: &Config, jobs: usize) -> Result<(Table, Vec<PointReport>)> {
    let points = config.scan_points()?;
    let reports = par_map(jobs, &points, |p| -> Result<PointReport> {
        let c = config.at(p)?;
        let setup = c.setup();
        let spec = c.gate_spec()?;
        let opts = c.vib_options();
        let times = residence_times(&setup, &spec, &opts.tol).map_err(|e| CliError::solver(describe(p), e))?;
        let (mut kick, mut rad) = axial_prediction(&setup, &spec, &times);
        if !opts.kicks {
            kick = 0.0;
        }
        if !opts.radiative {
            rad = 0.0;
        }
        let r = simulate_gate(&setup, &spec, &opts).map_err(|e| CliError::solver(describe(p), e))?;
        Ok(PointReport::new(p, &r, kick, rad))
    });
    let reports: Vec<PointReport> = reports.into_iter().collect::<Result<_>>()?;
    let mut table = table_with(&scan_columns(config), SIM_COLUMNS);
    table.note(format!("gate: {}", gate_label(&config.gate_spec()?)));
    for r in &reports {
        let mut row: Vec<f64> = r.point.iter().map(|x| x.1).collect();
        row.extend([
            r.fidelity,
            r.infidelity,
            r.predicted_kick,
            r.predicted_radiative,
            r.predicted_kick + r.predicted_radiative,
            r.n_max[0] as f64,
            r.members as f64,
            r.edge_population,
            r.norm_residual,
        ]);
        table.push(row);
    }
    Ok((table, reports))
}

pub fn gate_label(spec: &GateSpec) -> String {
    match *spec {
        GateSpec::PiTwoPiPi { tau1, dt1, dt2, .. } => format!("pi-2pi-pi, tau1 = {tau1} us, dt1 = {dt1} us, dt2 = {dt2} us"),
        GateSpec::Adiabatic { omega0, delta_ratio, dt, blockade, .. } => format!(
            "adiabatic, Omega0 = 2pi x {:.4} MHz, Delta/Omega0 = {delta_ratio}, dt = {dt} us, B = 2pi x {:.4} MHz",
            omega0 / std::f64::consts::TAU,
            blockade / std::f64::consts::TAU
        ),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub delta_ratio: f64,
    pub dt_us: f64,
    pub omega0_rad_per_s: f64,
    pub blockade_rad_per_s: f64,
    pub phase_defect_rad: f64,
    pub adiabaticity_margin: f64,
    pub phases: [f64; 3],
    pub evaluations: usize,
    pub tau_a_us: f64,
    pub tau_r_us: f64,
    pub tau_rr_us: f64,
    /// Closed-form budget at the configured setup, keyed by column name.
    pub budget: Vec<(String, f64)>,
}

/// Search (Δ/Ω₀, δt) for the configured Ω₀ and B. Needs an adiabatic or reference gate.
pub fn gate_search(config: &Config) -> Result<SearchReport> {
    let spec = config.gate_spec()?;
    let GateSpec::Adiabatic { omega0, blockade, .. } = spec else {
        return Err(CliError::Config("gate-search needs [gate] kind = \"adiabatic\" or \"reference\"".into()));
    };
    let opts = config.search_options();
    let found = search_adiabatic_params(blockade, omega0, &opts).map_err(|e| match e {
        Error::NoSolution { defect } => CliError::Search(format!("best phase defect {defect:.3e} rad exceeds {:.1e}", opts.accept)),
        Error::InvalidArgument(m) | Error::InvalidSetup(m) => CliError::Config(m),
        e => CliError::solver("gate search", e),
    })?;
    let setup = config.setup();
    let tol = config.tolerances();
    let times = residence_times(&setup, &found.spec, &tol).map_err(|e| CliError::solver("residence times", e))?;
    let Times::Adiabatic { tau_a, tau_r, tau_rr } = times else { unreachable!() };
    let GateSpec::Adiabatic { delta_ratio, dt, .. } = found.spec else { unreachable!() };
    let values = budget(&setup, &found.spec, &times);
    Ok(SearchReport {
        delta_ratio,
        dt_us: dt,
        omega0_rad_per_s: UnitSystem::internal_to_per_second(omega0),
        blockade_rad_per_s: UnitSystem::internal_to_per_second(blockade),
        phase_defect_rad: found.defect,
        adiabaticity_margin: found.margin,
        phases: [found.phases.phi01, found.phases.phi10, found.phases.phi11],
        evaluations: found.evaluations,
        tau_a_us: tau_a,
        tau_r_us: tau_r,
        tau_rr_us: tau_rr,
        budget: columns(&found.spec).iter().zip(values).map(|(c, v)| (c.0.to_string(), v)).collect(),
    })
}

pub fn run_estimate(config: &Config, out: &Path, jobs: usize) -> Result<Vec<PathBuf>> {
    let table = estimate(config, jobs)?;
    write_table(out, "estimate", &table, &Meta::new("estimate", &config.hash()), None)
}

pub fn run_simulate(config: &Config, out: &Path, jobs: usize) -> Result<Vec<PathBuf>> {
    let meta = Meta::new("simulate", &config.hash());
    let (table, reports) = simulate(config, jobs)?;
    let mut files = write_table(out, "simulate", &table, &meta, None)?;
    let json = out.join("simulate.json");
    write_json(&json, &meta, &serde_json::json!({ "points": reports }))?;
    files.push(json);
    Ok(files)
}

pub fn run_gate_search(config: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let meta = Meta::new("gate-search", &config.hash());
    let report = gate_search(config)?;
    let json = out.join("gate_search.json");
    write_json(&json, &meta, &report)?;
    Ok(vec![json])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GateSection, ScanAxis};

    #[test]
    fn single_point_gives_one_row() {
        let t = estimate(&Config::default(), 1).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.columns.len(), crate::budget::PI_COLUMNS.len());
    }

    #[test]
    fn temperature_scan_rows_are_ordered_and_deterministic() {
        let mut c = Config::default();
        c.scan.push(ScanAxis::linear("trap.temperature", 0.1e-6, 5e-6, 5));
        c.scan.push(ScanAxis::list("trap.f_parallel", &[10e3, 20e3, 50e3]));
        let a = estimate(&c, 3).unwrap();
        let b = estimate(&c, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 15);
        assert_eq!(a.rows[1][1], 20e3);
        let kick = a.column("infid_kick").unwrap();
        // Warmer rows carry more kick error at fixed trap frequency.
        assert!(kick[3] > kick[0]);
    }

    #[test]
    fn adiabatic_zero_rabi_is_config_error() {
        let c = Config {
            gate: GateSection::Adiabatic { omega0: 0.0, delta_ratio: -0.5, dt: 0.2, blockade: None, half_window: None },
            ..Config::default()
        };
        assert_eq!(gate_search(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn simulate_without_error_sources_is_ideal() {
        let mut c = Config::default();
        c.beams = vec![
            crate::config::BeamSection { wavelength: 780.0, direction: 1.0, waist: 2.0 },
            crate::config::BeamSection { wavelength: 780.0, direction: -1.0, waist: 2.0 },
        ];
        c.solver.radiative = false;
        c.rydberg.blockade = std::f64::consts::TAU * 2e10;
        let (t, r) = simulate(&c, 1).unwrap();
        assert!(r[0].infidelity < 1e-8, "{}", r[0].infidelity);
        assert_eq!(t.rows.len(), 1);
    }
}
