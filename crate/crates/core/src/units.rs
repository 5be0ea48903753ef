//! Constants, unit conversions and the physical setup record.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::{PI, TAU};

/// CODATA 2018.
pub mod constants {
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant, J/K.
    pub const K_B: f64 = 1.380_649e-23;
    /// Atomic mass unit, kg.
    pub const AMU: f64 = 1.660_539_066_60e-27;
    pub const CESIUM_MASS_U: f64 = 132.91;
    pub const STRONTIUM_MASS_U: f64 = 87.9;
}

use constants::{AMU, HBAR, K_B};

/// Conversions between SI and the internal scales (µs, µm, rad/µs, ħ = 1).
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitSystem;

impl UnitSystem {
    pub fn hz_to_angular(f_hz: f64) -> f64 {
        TAU * f_hz * 1e-6
    }
    pub fn angular_to_hz(w: f64) -> f64 {
        w * 1e6 / TAU
    }
    /// rad/s to rad/µs.
    pub fn per_second_to_internal(x: f64) -> f64 {
        x * 1e-6
    }
    pub fn internal_to_per_second(x: f64) -> f64 {
        x * 1e6
    }
    /// k_B T/ħ in rad/µs.
    pub fn kelvin_to_angular(t: f64) -> f64 {
        K_B * t / HBAR * 1e-6
    }
    pub fn angular_to_kelvin(w: f64) -> f64 {
        w * 1e6 * HBAR / K_B
    }
    pub fn seconds_to_internal(s: f64) -> f64 {
        s * 1e6
    }
    pub fn internal_to_seconds(t: f64) -> f64 {
        t * 1e-6
    }
    pub fn metres_to_internal(m: f64) -> f64 {
        m * 1e6
    }
    pub fn internal_to_metres(x: f64) -> f64 {
        x * 1e-6
    }
    pub fn nm_to_internal(nm: f64) -> f64 {
        nm * 1e-3
    }
    /// ħ/M in µm²/µs for a mass in atomic mass units.
    pub fn hbar_over_mass(mass_u: f64) -> f64 {
        HBAR / (mass_u * AMU) * 1e6
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Beam {
    pub wavelength_nm: f64,
    /// +1 or -1 along the common beam axis.
    pub direction: f64,
    pub waist_um: f64,
}

impl Beam {
    pub fn new(wavelength_nm: f64, direction: f64, waist_um: f64) -> Self {
        Self { wavelength_nm, direction, waist_um }
    }
    /// Signed wave number in rad/µm.
    pub fn wavenumber(&self) -> f64 {
        self.direction.signum() * TAU / UnitSystem::nm_to_internal(self.wavelength_nm)
    }
    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist_um * self.waist_um / UnitSystem::nm_to_internal(self.wavelength_nm)
    }
}

/// Every physical input of the models, in the external units named per field.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalSetup {
    /// Atomic mass units.
    pub mass: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Hz, along the beams.
    pub trap_freq_parallel: f64,
    /// Hz.
    pub trap_freq_perp: f64,
    pub trap_on: bool,
    pub beams: Vec<Beam>,
    /// µs.
    pub rydberg_lifetime: f64,
    /// rad/s.
    pub blockade: f64,
    /// µm.
    pub r12: f64,
    /// µm.
    pub misalign_x0: f64,
    /// µm.
    pub misalign_y0: f64,
}

impl Default for PhysicalSetup {
    fn default() -> Self {
        Self::cesium()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveWave {
    /// rad/µm, non-negative.
    pub k: f64,
    /// nm; infinite when k = 0.
    pub wavelength_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamGeometry {
    pub w0_eff: f64,
    pub xr_eff: f64,
    pub rayleigh: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recoil {
    /// E_rec/ħ in rad/µs.
    pub energy: f64,
    /// Thermal coherence length Δx in µm.
    pub coherence_length: f64,
    /// δx = ħKτ/M in µm for the requested τ.
    pub displacement: f64,
}

impl PhysicalSetup {
    /// Cs driven by counter-propagating 459/1038 nm beams of 2 µm waist, 66S parameters.
    pub fn cesium() -> Self {
        Self {
            mass: constants::CESIUM_MASS_U,
            temperature: 0.0,
            trap_freq_parallel: 10e3,
            trap_freq_perp: 50e3,
            trap_on: true,
            beams: vec![Beam::new(459.0, 1.0, 2.0), Beam::new(1038.0, -1.0, 2.0)],
            rydberg_lifetime: 130.0,
            blockade: TAU * 600e6,
            r12: 2.6,
            misalign_x0: 0.0,
            misalign_y0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSetup(m.into()));
        if !(self.mass > 0.0) {
            return bad("mass must be positive");
        }
        if !(self.temperature >= 0.0) {
            return bad("temperature must be non-negative");
        }
        if !(self.trap_freq_parallel > 0.0 && self.trap_freq_perp > 0.0) {
            return bad("trap frequencies must be positive");
        }
        if self.beams.is_empty() {
            return bad("at least one beam is required");
        }
        for (i, b) in self.beams.iter().enumerate() {
            if !(b.wavelength_nm > 0.0 && b.waist_um > 0.0) {
                return Err(Error::InvalidSetup(format!("beam {i}: wavelength and waist must be positive")));
            }
            if b.direction != 1.0 && b.direction != -1.0 {
                return Err(Error::InvalidSetup(format!("beam {i}: direction must be +1 or -1")));
            }
        }
        if !(self.r12 > 0.0) {
            return bad("r12 must be positive");
        }
        if !(self.rydberg_lifetime > 0.0) {
            return bad("rydberg lifetime must be positive (use f64::INFINITY for no decay)");
        }
        if !(self.blockade >= 0.0) {
            return bad("blockade must be non-negative");
        }
        Ok(())
    }

    /// ħ/M in µm²/µs.
    pub fn hbar_over_mass(&self) -> f64 {
        UnitSystem::hbar_over_mass(self.mass)
    }
    pub fn omega_parallel(&self) -> f64 {
        UnitSystem::hz_to_angular(self.trap_freq_parallel)
    }
    pub fn omega_perp(&self) -> f64 {
        UnitSystem::hz_to_angular(self.trap_freq_perp)
    }
    /// k_B T/ħ in rad/µs.
    pub fn thermal_angular(&self) -> f64 {
        UnitSystem::kelvin_to_angular(self.temperature)
    }
    /// Γ in rad/µs.
    pub fn decay_rate(&self) -> f64 {
        1.0 / self.rydberg_lifetime
    }
    /// ħB in rad/µs.
    pub fn blockade_internal(&self) -> f64 {
        UnitSystem::per_second_to_internal(self.blockade)
    }

    pub fn effective_wavevector(&self) -> EffectiveWave {
        let k = self.beams.iter().map(Beam::wavenumber).sum::<f64>().abs();
        let wavelength_nm = if k > 0.0 { TAU / k * 1e3 } else { f64::INFINITY };
        EffectiveWave { k, wavelength_nm }
    }

    pub fn beam_geometry(&self) -> BeamGeometry {
        let inv_w2: f64 = self.beams.iter().map(|b| 1.0 / (b.waist_um * b.waist_um)).sum();
        let rayleigh: Vec<f64> = self.beams.iter().map(Beam::rayleigh_range).collect();
        let inv_xr2: f64 = rayleigh.iter().map(|x| 1.0 / (x * x)).sum();
        BeamGeometry { w0_eff: 1.0 / inv_w2.sqrt(), xr_eff: 1.0 / inv_xr2.sqrt(), rayleigh }
    }

    /// k_B T_eff/ħ (rad/µs) for an oscillator of angular frequency `omega`.
    pub fn effective_temperature(&self, omega: f64) -> f64 {
        effective_temperature(self.thermal_angular(), omega)
    }

    /// Recoil energy and length scales for the setup's K, T_eff at `omega` and kick gap `tau`.
    pub fn recoil(&self, omega: f64, tau: f64) -> Recoil {
        let hm = self.hbar_over_mass();
        let k = self.effective_wavevector().k;
        let teff = self.effective_temperature(omega);
        Recoil {
            energy: 0.5 * hm * k * k,
            coherence_length: (hm / (2.0 * teff)).sqrt(),
            displacement: hm * k * tau,
        }
    }

    /// rms thermal position spread √(k_B T_eff/Mω²) in µm.
    pub fn thermal_extent(&self, omega: f64) -> f64 {
        (self.effective_temperature(omega) * self.hbar_over_mass()).sqrt() / omega
    }

    /// rms extent from the bath temperature alone, √(k_B T/Mω²).
    pub fn classical_extent(&self, omega: f64) -> f64 {
        (self.thermal_angular() * self.hbar_over_mass()).sqrt() / omega
    }
}

/// ω(1/2 + 1/(e^{ω/θ} − 1)) with θ = k_B T/ħ; the T = 0 limit ω/2 is exact.
pub fn effective_temperature(theta: f64, omega: f64) -> f64 {
    if theta <= 0.0 {
        return 0.5 * omega;
    }
    let x = omega / theta;
    if x > 700.0 {
        return 0.5 * omega;
    }
    if x < 1e-8 {
        // ω/x_m1(x) ≈ θ(1 − x/2 + x²/12); keeps the classical limit exact.
        return theta * (1.0 + x * x / 12.0);
    }
    omega * (0.5 + 1.0 / x.exp_m1())
}

/// Bath θ = k_B T/ħ giving the requested effective temperature at `omega`.
pub fn temperature_for_effective(teff: f64, omega: f64) -> Result<f64> {
    let r = teff / omega - 0.5;
    if r < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "effective temperature {teff} below zero-point value {}",
            0.5 * omega
        )));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(omega / (1.0 / r).ln_1p())
}
