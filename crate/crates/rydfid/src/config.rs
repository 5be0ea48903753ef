//! TOML experiment configuration.
//!
//! Units follow the setup record: mass in u, temperature in K, trap frequencies in Hz,
//! wavelengths in nm, waists and distances in µm, lifetimes and gate times in µs,
//! and angular frequencies (Rabi, blockade) in rad/s.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rydfid_core::ode::Tolerances;
use rydfid_core::protocols::envelope::GAUSSIAN_WINDOW;
use rydfid_core::protocols::gate::{GateSpec, REFERENCE_GATES, REFERENCE_OMEGA0};
use rydfid_core::protocols::search::{PhaseModel, SearchOptions};
use rydfid_core::units::constants::CESIUM_MASS_U;
use rydfid_core::vib::{EngineChoice, PhaseMode, VibOptions};
use rydfid_core::{Beam, PhysicalSetup, UnitSystem};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub atom: AtomSection,
    #[serde(default)]
    pub trap: TrapSection,
    #[serde(default = "default_beams")]
    pub beams: Vec<BeamSection>,
    #[serde(default)]
    pub rydberg: RydbergSection,
    #[serde(default)]
    pub gate: GateSection,
    #[serde(default)]
    pub scan: Vec<ScanAxis>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub search: SearchSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            atom: AtomSection::default(),
            trap: TrapSection::default(),
            beams: default_beams(),
            rydberg: RydbergSection::default(),
            gate: GateSection::default(),
            scan: Vec::new(),
            solver: SolverSection::default(),
            search: SearchSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    pub mass: f64,
}

impl Default for AtomSection {
    fn default() -> Self {
        Self { mass: CESIUM_MASS_U }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_f_parallel")]
    pub f_parallel: f64,
    #[serde(default = "default_f_perp")]
    pub f_perp: f64,
    #[serde(default = "default_true")]
    pub trap_on: bool,
}

impl Default for TrapSection {
    fn default() -> Self {
        Self { temperature: 0.0, f_parallel: default_f_parallel(), f_perp: default_f_perp(), trap_on: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    pub wavelength: f64,
    pub direction: f64,
    pub waist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RydbergSection {
    #[serde(default = "default_lifetime")]
    pub lifetime: f64,
    #[serde(default = "default_blockade")]
    pub blockade: f64,
    #[serde(default = "default_r12")]
    pub r12: f64,
    #[serde(default)]
    pub misalign_x0: f64,
    #[serde(default)]
    pub misalign_y0: f64,
}

impl Default for RydbergSection {
    fn default() -> Self {
        Self { lifetime: default_lifetime(), blockade: default_blockade(), r12: default_r12(), misalign_x0: 0.0, misalign_y0: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateSection {
    /// Times in µs, amplitudes in rad/s (omitted amplitudes are calibrated to π and 2π).
    #[serde(rename = "pi_2pi_pi")]
    PiTwoPiPi {
        tau1: f64,
        dt1: f64,
        dt2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega1_max: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega2_max: Option<f64>,
    },
    /// Ω₀ and B in rad/s, δt in µs; B defaults to the [rydberg] value.
    Adiabatic {
        omega0: f64,
        delta_ratio: f64,
        dt: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        blockade: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_window: Option<f64>,
    },
    /// One of the three reference adiabatic gates (1, 2 or 3).
    Reference { index: usize },
}

impl Default for GateSection {
    fn default() -> Self {
        GateSection::PiTwoPiPi { tau1: 1.0044, dt1: 0.14, dt2: 0.22, omega1_max: None, omega2_max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanAxis {
    pub variable: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub log: bool,
    /// Explicit values instead of start/stop/points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl ScanAxis {
    pub fn linear(variable: &str, start: f64, stop: f64, points: usize) -> Self {
        Self { variable: variable.into(), start: Some(start), stop: Some(stop), points: Some(points), log: false, values: None }
    }

    pub fn list(variable: &str, values: &[f64]) -> Self {
        Self { variable: variable.into(), start: None, stop: None, points: None, log: false, values: Some(values.to_vec()) }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            if v.is_empty() {
                return Err(CliError::Config(format!("scan {}: empty value list", self.variable)));
            }
            return Ok(v.clone());
        }
        let (Some(a), Some(b), Some(n)) = (self.start, self.stop, self.points) else {
            return Err(CliError::Config(format!("scan {}: needs start, stop and points, or values", self.variable)));
        };
        if n < 2 {
            return Err(CliError::Config(format!("scan {}: points must be >= 2", self.variable)));
        }
        if self.log && !(a > 0.0 && b > 0.0) {
            return Err(CliError::Config(format!("scan {}: log scan needs positive bounds", self.variable)));
        }
        Ok((0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                if self.log {
                    (a.ln() + u * (b.ln() - a.ln())).exp()
                } else {
                    a + u * (b - a)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_cutoff")]
    pub weight_cutoff: f64,
    #[serde(default)]
    pub phase_mode: PhaseModeName,
    #[serde(default)]
    pub engine: EngineName,
    #[serde(default = "default_true")]
    pub kicks: bool,
    #[serde(default = "default_true")]
    pub radiative: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            n_max: None,
            rtol: default_rtol(),
            atol: default_atol(),
            weight_cutoff: default_cutoff(),
            phase_mode: PhaseModeName::default(),
            engine: EngineName::default(),
            kicks: true,
            radiative: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModeName {
    #[default]
    PerQubit,
    Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineName {
    #[default]
    Auto,
    General,
    Factorized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default = "default_ratio_bounds")]
    pub ratio_bounds: [f64; 2],
    /// µs; equal ends pin δt.
    #[serde(default = "default_dt_bounds")]
    pub dt_bounds: [f64; 2],
    #[serde(default)]
    pub adiabatic_phases: bool,
    #[serde(default = "default_accept")]
    pub accept: f64,
}

impl Default for SearchSection {
    fn default() -> Self {
        Self { ratio_bounds: default_ratio_bounds(), dt_bounds: default_dt_bounds(), adiabatic_phases: false, accept: default_accept() }
    }
}

fn default_beams() -> Vec<BeamSection> {
    vec![
        BeamSection { wavelength: 459.0, direction: 1.0, waist: 2.0 },
        BeamSection { wavelength: 1038.0, direction: -1.0, waist: 2.0 },
    ]
}
fn default_f_parallel() -> f64 {
    10e3
}
fn default_f_perp() -> f64 {
    50e3
}
fn default_true() -> bool {
    true
}
fn default_lifetime() -> f64 {
    130.0
}
fn default_blockade() -> f64 {
    std::f64::consts::TAU * 600e6
}
fn default_r12() -> f64 {
    2.6
}
fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}
fn default_cutoff() -> f64 {
    1e-3
}
fn default_ratio_bounds() -> [f64; 2] {
    let d = SearchOptions::default().ratio_bounds;
    [d.0, d.1]
}
fn default_dt_bounds() -> [f64; 2] {
    let d = SearchOptions::default().dt_bounds;
    [d.0, d.1]
}
fn default_accept() -> f64 {
    SearchOptions::default().accept
}

/// Keys a `[[scan]]` axis may name, besides `beams.<i>.wavelength|waist|direction`.
pub const SCAN_KEYS: &[&str] = &[
    "atom.mass",
    "trap.temperature",
    "trap.f_parallel",
    "trap.f_perp",
    "rydberg.lifetime",
    "rydberg.blockade",
    "rydberg.r12",
    "rydberg.misalign_x0",
    "rydberg.misalign_y0",
    "gate.tau1",
    "gate.dt1",
    "gate.dt2",
    "gate.omega0",
    "gate.delta_ratio",
    "gate.dt",
    "gate.blockade",
];

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, so formatting and comments do not matter.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.setup().validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.gate_spec()?.validate().map_err(|e| CliError::Config(e.to_string()))?;
        for axis in &self.scan {
            axis.values()?;
            // Probe the key on a copy so unknown or inapplicable keys fail early.
            self.clone().apply(&axis.variable, 1.0)?;
        }
        if !(self.solver.rtol > 0.0 && self.solver.atol > 0.0) {
            return Err(CliError::Config("solver tolerances must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.solver.weight_cutoff) {
            return Err(CliError::Config("solver.weight_cutoff must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn setup(&self) -> PhysicalSetup {
        PhysicalSetup {
            mass: self.atom.mass,
            temperature: self.trap.temperature,
            trap_freq_parallel: self.trap.f_parallel,
            trap_freq_perp: self.trap.f_perp,
            trap_on: self.trap.trap_on,
            beams: self.beams.iter().map(|b| Beam::new(b.wavelength, b.direction, b.waist)).collect(),
            rydberg_lifetime: self.rydberg.lifetime,
            blockade: self.rydberg.blockade,
            r12: self.rydberg.r12,
            misalign_x0: self.rydberg.misalign_x0,
            misalign_y0: self.rydberg.misalign_y0,
        }
    }

    /// Gate in internal units.
    pub fn gate_spec(&self) -> Result<GateSpec> {
        let internal = UnitSystem::per_second_to_internal;
        match self.gate {
            GateSection::PiTwoPiPi { tau1, dt1, dt2, omega1_max, omega2_max } => Ok(GateSpec::PiTwoPiPi {
                omega1_max: omega1_max.map(internal),
                omega2_max: omega2_max.map(internal),
                tau1,
                dt1,
                dt2,
            }),
            GateSection::Adiabatic { omega0, delta_ratio, dt, blockade, half_window } => Ok(GateSpec::Adiabatic {
                omega0: internal(omega0),
                delta_ratio,
                dt,
                blockade: internal(blockade.unwrap_or(self.rydberg.blockade)),
                half_window: half_window.unwrap_or(GAUSSIAN_WINDOW),
            }),
            GateSection::Reference { index } => {
                if !(1..=REFERENCE_GATES.len()).contains(&index) {
                    return Err(CliError::Config(format!("gate.index must be 1..=3, got {index}")));
                }
                Ok(GateSpec::reference_adiabatic(index))
            }
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances::new(self.solver.rtol, self.solver.atol)
    }

    pub fn vib_options(&self) -> VibOptions {
        VibOptions {
            n_max: self.solver.n_max,
            cutoff: self.solver.weight_cutoff,
            tol: self.tolerances(),
            phase_mode: match self.solver.phase_mode {
                PhaseModeName::PerQubit => PhaseMode::PerQubit,
                PhaseModeName::Common => PhaseMode::Common,
            },
            engine: match self.solver.engine {
                EngineName::Auto => EngineChoice::Auto,
                EngineName::General => EngineChoice::General,
                EngineName::Factorized => EngineChoice::Factorized,
            },
            kicks: self.solver.kicks,
            radiative: self.solver.radiative,
            blockade: None,
        }
    }

    pub fn search_options(&self) -> SearchOptions {
        let s = &self.search;
        SearchOptions {
            ratio_bounds: (s.ratio_bounds[0], s.ratio_bounds[1]),
            dt_bounds: (s.dt_bounds[0], s.dt_bounds[1]),
            phase_model: if s.adiabatic_phases { PhaseModel::Adiabatic } else { PhaseModel::Propagated },
            accept: s.accept,
            ..SearchOptions::default()
        }
    }

    /// Set the config key `variable` to `value`.
    pub fn apply(&mut self, variable: &str, value: f64) -> Result<()> {
        let unknown = || CliError::Config(format!("scan variable `{variable}` does not name a config key of this gate"));
        if let Some(rest) = variable.strip_prefix("beams.") {
            let (i, field) = rest.split_once('.').ok_or_else(unknown)?;
            let i: usize = i.parse().map_err(|_| unknown())?;
            let beam = self.beams.get_mut(i).ok_or_else(unknown)?;
            match field {
                "wavelength" => beam.wavelength = value,
                "waist" => beam.waist = value,
                "direction" => beam.direction = value,
                _ => return Err(unknown()),
            }
            return Ok(());
        }
        match variable {
            "atom.mass" => self.atom.mass = value,
            "trap.temperature" => self.trap.temperature = value,
            "trap.f_parallel" => self.trap.f_parallel = value,
            "trap.f_perp" => self.trap.f_perp = value,
            "rydberg.lifetime" => self.rydberg.lifetime = value,
            "rydberg.blockade" => self.rydberg.blockade = value,
            "rydberg.r12" => self.rydberg.r12 = value,
            "rydberg.misalign_x0" => self.rydberg.misalign_x0 = value,
            "rydberg.misalign_y0" => self.rydberg.misalign_y0 = value,
            _ => {
                let field = variable.strip_prefix("gate.").ok_or_else(unknown)?;
                if let GateSection::Reference { index } = self.gate {
                    // Expand so the gate fields become addressable.
                    let (ratio, dt, b) = REFERENCE_GATES[index.clamp(1, 3) - 1];
                    self.gate = GateSection::Adiabatic {
                        omega0: UnitSystem::internal_to_per_second(REFERENCE_OMEGA0),
                        delta_ratio: ratio,
                        dt,
                        blockade: Some(std::f64::consts::TAU * b * 1e6),
                        half_window: None,
                    };
                }
                match (&mut self.gate, field) {
                    (GateSection::PiTwoPiPi { tau1, .. }, "tau1") => *tau1 = value,
                    (GateSection::PiTwoPiPi { dt1, .. }, "dt1") => *dt1 = value,
                    (GateSection::PiTwoPiPi { dt2, .. }, "dt2") => *dt2 = value,
                    (GateSection::Adiabatic { omega0, .. }, "omega0") => *omega0 = value,
                    (GateSection::Adiabatic { delta_ratio, .. }, "delta_ratio") => *delta_ratio = value,
                    (GateSection::Adiabatic { dt, .. }, "dt") => *dt = value,
                    (GateSection::Adiabatic { blockade, .. }, "blockade") => *blockade = Some(value),
                    _ => return Err(unknown()),
                }
            }
        }
        Ok(())
    }

    /// Scan points as the Cartesian product of the axes, first axis outermost.
    /// Without axes there is one point with no assignments.
    pub fn scan_points(&self) -> Result<Vec<Vec<(String, f64)>>> {
        let mut points: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for axis in &self.scan {
            let values = axis.values()?;
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((axis.variable.clone(), v));
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }

    pub fn at(&self, point: &[(String, f64)]) -> Result<Self> {
        let mut c = self.clone();
        for (k, v) in point {
            c.apply(k, *v)?;
        }
        c.validate_point()?;
        Ok(c)
    }

    fn validate_point(&self) -> Result<()> {
        self.setup().validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.gate_spec()?.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_cesium_defaults() {
        let c = Config::from_toml("").unwrap();
        assert_eq!(c.setup(), PhysicalSetup::cesium());
        assert_eq!(c.gate_spec().unwrap(), GateSpec::pi_2pi_pi_default());
        assert_eq!(c.scan_points().unwrap().len(), 1);
    }

    #[test]
    fn full_file_round_trips() {
        let text = r#"
[atom]
mass = 87.9

[trap]
temperature = 1e-6
f_parallel = 20e3
f_perp = 40e3
trap_on = false

[[beams]]
wavelength = 317.0
direction = 1
waist = 3.0

[rydberg]
lifetime = 366.0
blockade = 3.7699e8
r12 = 4.2
misalign_y0 = 0.1

[gate]
kind = "adiabatic"
omega0 = 1.0681e8
delta_ratio = -0.8635
dt = 0.2165

[[scan]]
variable = "trap.temperature"
start = 0.0
stop = 5e-6
points = 3

[[scan]]
variable = "trap.f_parallel"
values = [10e3, 20e3]

[solver]
n_max = 12
phase_mode = "common"
engine = "general"
"#;
        let c = Config::from_toml(text).unwrap();
        assert_eq!(c.setup().beams.len(), 1);
        assert!(!c.setup().trap_on);
        let GateSpec::Adiabatic { blockade, omega0, .. } = c.gate_spec().unwrap() else { panic!() };
        assert!((blockade - 376.99).abs() < 1e-9 && (omega0 - 106.81).abs() < 1e-9);
        let pts = c.scan_points().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], vec![("trap.temperature".to_string(), 0.0), ("trap.f_parallel".to_string(), 20e3)]);
        assert_eq!(c.vib_options().phase_mode, PhaseMode::Common);
        let again = Config::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Config::from_toml("[trap]\nbogus = 1"), Err(CliError::Config(_))));
        assert!(Config::from_toml("[atom]\nmass = -1").is_err());
        let bad_scan = "[[scan]]\nvariable = \"gate.omega0\"\nstart = 1\nstop = 2\npoints = 3";
        assert!(Config::from_toml(bad_scan).is_err(), "omega0 is not a pi-2pi-pi key");
        let one_point = "[[scan]]\nvariable = \"trap.temperature\"\nstart = 0\nstop = 1e-6\npoints = 1";
        assert!(Config::from_toml(one_point).is_err());
        let zero_rabi = "[gate]\nkind = \"adiabatic\"\nomega0 = 0\ndelta_ratio = -0.5\ndt = 0.2";
        assert_eq!(Config::from_toml(zero_rabi).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn reference_gates_expand_when_scanned() {
        let mut c = Config { gate: GateSection::Reference { index: 3 }, ..Config::default() };
        let before = c.gate_spec().unwrap();
        c.apply("gate.dt", 0.5).unwrap();
        let after = c.gate_spec().unwrap();
        let (GateSpec::Adiabatic { omega0: a, blockade: b, .. }, GateSpec::Adiabatic { omega0: x, blockade: y, .. }) = (before, after) else {
            panic!()
        };
        assert!((a - x).abs() < 1e-9 && (b - y).abs() < 1e-9);
    }

    #[test]
    fn log_scan_endpoints() {
        let a = ScanAxis { log: true, ..ScanAxis::linear("trap.f_parallel", 5e3, 200e3, 4) };
        let v = a.values().unwrap();
        assert!((v[0] - 5e3).abs() < 1e-9 && (v[3] - 200e3).abs() < 1e-6);
        assert!((v[1] / v[0] - v[2] / v[1]).abs() < 1e-12);
    }
}
