//! Gate protocols and the per-atom drive schedules they generate.

use alloc::format;
use alloc::vec::Vec;

use super::envelope::{calibrate_pulse_area, PulseEnvelope, GAUSSIAN_WINDOW};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::{PI, TAU};

/// Peak Rabi frequency of the reference adiabatic gates, 2π·17 MHz in rad/µs.
pub const REFERENCE_OMEGA0: f64 = TAU * 17.0;

/// (Δ/Ω₀, δt µs, B/2π MHz) of the three reference adiabatic gates.
pub const REFERENCE_GATES: [(f64, f64, f64); 3] = [(-0.5, 0.2, 600.0), (-0.8635, 0.2165, 60.0), (-0.3, 0.5, 4.0)];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GateSpec {
    /// π on atom 1, 2π on atom 2, π on atom 1; t⁶ super-Gaussian pulses.
    /// Amplitudes of `None` are calibrated to areas π and 2π.
    PiTwoPiPi { omega1_max: Option<f64>, omega2_max: Option<f64>, tau1: f64, dt1: f64, dt2: f64 },
    /// One Gaussian pulse Ω₀e^{−t²/δt²} with detuning Δ = ratio·Ω₀ on both atoms.
    Adiabatic { omega0: f64, delta_ratio: f64, dt: f64, blockade: f64, half_window: f64 },
}

impl GateSpec {
    pub fn pi_2pi_pi_default() -> Self {
        GateSpec::PiTwoPiPi { omega1_max: None, omega2_max: None, tau1: 1.0044, dt1: 0.14, dt2: 0.22 }
    }

    /// Reference adiabatic gate `index` ∈ {1, 2, 3}.
    pub fn reference_adiabatic(index: usize) -> Self {
        let (ratio, dt, b) = REFERENCE_GATES[index - 1];
        GateSpec::Adiabatic {
            omega0: REFERENCE_OMEGA0,
            delta_ratio: ratio,
            dt,
            blockade: TAU * b,
            half_window: GAUSSIAN_WINDOW,
        }
    }

    pub fn adiabatic(omega0: f64, delta_ratio: f64, dt: f64, blockade: f64) -> Self {
        GateSpec::Adiabatic { omega0, delta_ratio, dt, blockade, half_window: GAUSSIAN_WINDOW }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GateSpec::PiTwoPiPi { omega1_max, omega2_max, tau1, dt1, dt2 } => {
                if !(tau1 > 0.0 && dt1 > 0.0 && dt2 > 0.0) {
                    return Err(Error::InvalidArgument("pi-2pi-pi timings must be positive".into()));
                }
                if tau1 <= 2.0 * dt1 {
                    return Err(Error::InvalidArgument(format!("tau1 = {tau1} must exceed 2 dt1 = {}", 2.0 * dt1)));
                }
                for a in [omega1_max, omega2_max].into_iter().flatten() {
                    if !(a > 0.0) {
                        return Err(Error::InvalidArgument("pulse amplitudes must be positive".into()));
                    }
                }
            }
            GateSpec::Adiabatic { omega0, dt, blockade, half_window, delta_ratio } => {
                if !(omega0 > 0.0 && dt > 0.0 && half_window > 0.0) {
                    return Err(Error::InvalidArgument("adiabatic gate needs omega0, dt, window > 0".into()));
                }
                if !(blockade >= 0.0) || !delta_ratio.is_finite() {
                    return Err(Error::InvalidArgument("blockade must be >= 0 and detuning finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Blockade shift (rad/µs): the gate's own for adiabatic gates, else `fallback`.
    pub fn blockade_or(&self, fallback: f64) -> f64 {
        match *self {
            GateSpec::Adiabatic { blockade, .. } => blockade,
            GateSpec::PiTwoPiPi { .. } => fallback,
        }
    }

    pub fn schedule(&self) -> Result<Schedule> {
        self.validate()?;
        match *self {
            GateSpec::PiTwoPiPi { omega1_max, omega2_max, tau1, dt1, dt2 } => {
                pi_2pi_pi_schedule(omega1_max, omega2_max, tau1, dt1, dt2)
            }
            GateSpec::Adiabatic { omega0, delta_ratio, dt, half_window, .. } => {
                let env = PulseEnvelope::gaussian(dt, omega0, half_window).with_detuning(delta_ratio * omega0);
                let h = half_window * dt;
                Ok(Schedule { t_start: -h, t_end: h, drives: [env.clone(), env] })
            }
        }
    }
}

/// Drives for atoms 1 and 2 over [t_start, t_end].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Schedule {
    pub t_start: f64,
    pub t_end: f64,
    pub drives: [PulseEnvelope; 2],
}

impl Schedule {
    /// Sorted unique times at which the Hamiltonian changes character.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .drives
            .iter()
            .flat_map(|d| d.breakpoints())
            .filter(|&t| t > self.t_start && t < self.t_end)
            .collect();
        b.push(self.t_start);
        b.push(self.t_end);
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        b
    }

    /// Whether atom `j` may be driven anywhere inside (a, b).
    pub fn driven_in(&self, j: usize, a: f64, b: f64) -> bool {
        self.drives[j].windows().iter().any(|&(lo, hi)| lo < b && hi > a)
    }

    /// True when no instant has both atoms driven.
    pub fn is_sequential(&self) -> bool {
        let (w0, w1) = (self.drives[0].windows(), self.drives[1].windows());
        !w0.iter().any(|a| w1.iter().any(|b| a.0 < b.1 && b.0 < a.1))
    }
}

fn pi_2pi_pi_schedule(o1: Option<f64>, o2: Option<f64>, tau1: f64, dt1: f64, dt2: f64) -> Result<Schedule> {
    let mut e1 = PulseEnvelope::super_gaussian_pair(dt1, tau1, 1.0);
    let mut e2 = PulseEnvelope::super_gaussian_single(dt2, 1.0);
    let a1 = o1.unwrap_or(PI / super::envelope::super_gaussian_integral(dt1));
    let a2 = o2.unwrap_or(TAU / super::envelope::super_gaussian_integral(dt2));
    // Clip tails where the neighbouring pulses of different atoms cross so the drives never overlap.
    let (first, second) = (e1.components[0], e2.components[0]);
    if first.window.1 > second.window.0 {
        let f = |t: f64| a1 * first.shape_value(t) - a2 * second.shape_value(t);
        let (mut lo, mut hi) = (first.center, second.center);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tc = 0.5 * (lo + hi);
        e1.components[0].window.1 = tc;
        e1.components[1].window.0 = -tc;
        e2.components[0].window = (tc, -tc);
    }
    for c in e1.components.iter_mut() {
        c.amplitude = match o1 {
            Some(a) => a,
            None => calibrate_pulse_area(c, PI)?,
        };
    }
    let c2 = &mut e2.components[0];
    c2.amplitude = match o2 {
        Some(a) => a,
        None => calibrate_pulse_area(c2, TAU)?,
    };
    let t_start = e1.components[0].window.0;
    let t_end = e1.components[1].window.1;
    Ok(Schedule { t_start, t_end, drives: [e1, e2] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_2pi_pi_is_sequential_and_calibrated() {
        let s = GateSpec::pi_2pi_pi_default().schedule().unwrap();
        assert!(s.is_sequential());
        assert!((s.drives[0].components[0].area() - PI).abs() < 1e-10);
        assert!((s.drives[0].components[1].area() - PI).abs() < 1e-10);
        assert!((s.drives[1].area() - TAU).abs() < 1e-10);
        // Truncation barely moves the amplitude from the closed form.
        let closed = PI / super::super::envelope::super_gaussian_integral(0.14);
        assert!((s.drives[0].components[0].amplitude - closed).abs() / closed < 1e-3);
    }

    #[test]
    fn tau1_must_exceed_two_dt1() {
        let g = GateSpec::PiTwoPiPi { omega1_max: None, omega2_max: None, tau1: 0.2, dt1: 0.14, dt2: 0.22 };
        assert!(g.validate().is_err());
    }

    #[test]
    fn adiabatic_schedule_window() {
        let s = GateSpec::reference_adiabatic(3).schedule().unwrap();
        assert_eq!((s.t_start, s.t_end), (-2.0, 2.0));
        assert!(!s.is_sequential());
        assert!((s.drives[0].detuning + 0.3 * REFERENCE_OMEGA0).abs() < 1e-12);
    }
}
