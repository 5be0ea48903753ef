//! Rabi-frequency envelopes built from windowed components.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::gamma;
use crate::ode::{quad, Tolerances};

/// Half-width, in units of δt, beyond which e^{−(t/δt)⁶} < 1e-17.
pub const SUPER_GAUSSIAN_CUTOFF: f64 = 1.85;
/// Default half-window of the Gaussian adiabatic pulse, in units of δt.
pub const GAUSSIAN_WINDOW: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Shape {
    /// Constant over the window.
    FlatTop,
    /// e^{−(t−c)²/w²}
    Gaussian,
    /// e^{−(t−c)⁶/w⁶}
    SuperGaussian,
    /// e^{−(t−c)²/w²} − e^{−T²/4w²} on a window of length T centred on c.
    OffsetGaussian { duration: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseComponent {
    pub shape: Shape,
    pub center: f64,
    /// δt, σ or the flat-top duration.
    pub width: f64,
    /// Peak Rabi frequency Ω_max (rad/µs).
    pub amplitude: f64,
    /// Ω = 0 outside [lo, hi].
    pub window: (f64, f64),
}

impl PulseComponent {
    pub fn shape_value(&self, t: f64) -> f64 {
        if t < self.window.0 || t > self.window.1 {
            return 0.0;
        }
        let u = (t - self.center) / self.width;
        match self.shape {
            Shape::FlatTop => 1.0,
            Shape::Gaussian => (-u * u).exp(),
            Shape::SuperGaussian => (-u.powi(6)).exp(),
            Shape::OffsetGaussian { duration } => {
                let floor = (-(duration * duration) / (4.0 * self.width * self.width)).exp();
                ((-u * u).exp() - floor).max(0.0)
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * self.shape_value(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t < self.window.0 || t > self.window.1 {
            return 0.0;
        }
        let u = (t - self.center) / self.width;
        let d = match self.shape {
            Shape::FlatTop => 0.0,
            Shape::Gaussian | Shape::OffsetGaussian { .. } => -2.0 * u * (-u * u).exp() / self.width,
            Shape::SuperGaussian => -6.0 * u.powi(5) * (-u.powi(6)).exp() / self.width,
        };
        self.amplitude * d
    }

    /// ∫ shape dt over the window.
    pub fn shape_integral(&self) -> f64 {
        let (lo, hi) = self.window;
        match self.shape {
            Shape::FlatTop => hi - lo,
            _ => {
                let tol = Tolerances::new(1e-13, 1e-16);
                let mut acc = 0.0;
                // Split at the centre so the stepper sees the peak.
                let c = self.center.clamp(lo, hi);
                for (a, b) in [(lo, c), (c, hi)] {
                    if b > a {
                        acc += quad(|t| self.shape_value(t), a, b, &tol).unwrap_or(f64::NAN);
                    }
                }
                acc
            }
        }
    }

    pub fn area(&self) -> f64 {
        self.amplitude * self.shape_integral()
    }
}

/// Ω(t) as a sum of windowed components plus a constant Rydberg-level detuning Δ (rad/µs).
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseEnvelope {
    pub components: Vec<PulseComponent>,
    pub detuning: f64,
}

impl PulseEnvelope {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn flat_top(start: f64, duration: f64, amplitude: f64) -> Self {
        Self::single(PulseComponent {
            shape: Shape::FlatTop,
            center: start + 0.5 * duration,
            width: duration,
            amplitude,
            window: (start, start + duration),
        })
    }

    /// Ω₀e^{−t²/δt²} on ±`half_window`·δt.
    pub fn gaussian(dt: f64, amplitude: f64, half_window: f64) -> Self {
        Self::single(PulseComponent {
            shape: Shape::Gaussian,
            center: 0.0,
            width: dt,
            amplitude,
            window: (-half_window * dt, half_window * dt),
        })
    }

    /// Two Gaussian π pulses at 0 and τ, each with area π.
    pub fn gaussian_pair(dt: f64, tau: f64) -> Self {
        let amp = crate::math::PI.sqrt() / dt;
        let mk = |c: f64| PulseComponent {
            shape: Shape::Gaussian,
            center: c,
            width: dt,
            amplitude: amp,
            window: (c - 8.0 * dt, c + 8.0 * dt),
        };
        Self { components: vec![mk(0.0), mk(tau)], detuning: 0.0 }
    }

    /// Ω_max[e^{−(t+τ/2)⁶/δt⁶} + e^{−(t−τ/2)⁶/δt⁶}].
    pub fn super_gaussian_pair(dt: f64, tau: f64, amplitude: f64) -> Self {
        let h = SUPER_GAUSSIAN_CUTOFF * dt;
        let mk = |c: f64| PulseComponent {
            shape: Shape::SuperGaussian,
            center: c,
            width: dt,
            amplitude,
            window: (c - h, c + h),
        };
        Self { components: vec![mk(-0.5 * tau), mk(0.5 * tau)], detuning: 0.0 }
    }

    pub fn super_gaussian_single(dt: f64, amplitude: f64) -> Self {
        let h = SUPER_GAUSSIAN_CUTOFF * dt;
        Self::single(PulseComponent {
            shape: Shape::SuperGaussian,
            center: 0.0,
            width: dt,
            amplitude,
            window: (-h, h),
        })
    }

    /// Ω_max(e^{−(t−T/2)²/σ²} − e^{−T²/4σ²}) on [0, T].
    pub fn offset_gaussian(sigma: f64, duration: f64, amplitude: f64) -> Self {
        Self::single(PulseComponent {
            shape: Shape::OffsetGaussian { duration },
            center: 0.5 * duration,
            width: sigma,
            amplitude,
            window: (0.0, duration),
        })
    }

    pub fn single(c: PulseComponent) -> Self {
        Self { components: vec![c], detuning: 0.0 }
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.value(t)).sum()
    }

    pub fn omega_dot(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.derivative(t)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.amplitude == 0.0)
    }

    /// Sorted, merged intervals on which Ω may be non-zero.
    pub fn windows(&self) -> Vec<(f64, f64)> {
        let mut w: Vec<(f64, f64)> = self
            .components
            .iter()
            .filter(|c| c.amplitude != 0.0 && c.window.1 > c.window.0)
            .map(|c| c.window)
            .collect();
        w.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for iv in w {
            match out.last_mut() {
                Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
                _ => out.push(iv),
            }
        }
        out
    }

    /// Overall [first window start, last window end], or None for a zero envelope.
    pub fn support(&self) -> Option<(f64, f64)> {
        let w = self.windows();
        Some((w.first()?.0, w.last()?.1))
    }

    /// Component breakpoints, including centres of smooth components.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = Vec::new();
        for c in &self.components {
            if c.amplitude == 0.0 {
                continue;
            }
            b.push(c.window.0);
            b.push(c.window.1);
            if !matches!(c.shape, Shape::FlatTop) {
                b.push(c.center.clamp(c.window.0, c.window.1));
            }
        }
        b
    }

    pub fn area(&self) -> f64 {
        self.components.iter().map(PulseComponent::area).sum()
    }

    /// Flat-top components only, as (start, end, Ω) segments.
    pub fn piecewise_constant(&self) -> Option<Vec<(f64, f64, f64)>> {
        let mut segs = Vec::new();
        for c in &self.components {
            if !matches!(c.shape, Shape::FlatTop) {
                return None;
            }
            segs.push((c.window.0, c.window.1, c.amplitude));
        }
        segs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in segs.windows(2) {
            if w[1].0 < w[0].1 {
                return None;
            }
        }
        Some(segs)
    }
}

/// Peak amplitude giving `target_area` for a unit-amplitude component (its window is respected).
pub fn calibrate_pulse_area(component: &PulseComponent, target_area: f64) -> Result<f64> {
    let s = component.shape_integral();
    if !(s > 0.0) {
        return Err(Error::InvalidArgument("envelope shape has zero area".into()));
    }
    Ok(target_area / s)
}

/// Closed-form ∫e^{−t⁶/δt⁶}dt over the real line.
pub fn super_gaussian_integral(dt: f64) -> f64 {
    2.0 * dt * gamma(7.0 / 6.0)
}
