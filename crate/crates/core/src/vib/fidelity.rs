//! Bell-state fidelity after the gate, phase correction and a Hadamard on qubit 2.

use num_complex::Complex64;

#[allow(unused_imports)]
use crate::math::Float;
use crate::math::{wrap_angle, TAU};

/// Amplitudes of H₁H₂|11⟩ in the order 00, 01, 10, 11.
pub const INPUT_AMPLITUDES: [f64; 4] = [0.5, -0.5, -0.5, 0.5];

pub type Matrix4 = [[Complex64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PhaseMode {
    /// Independent phases on |1⟩ of each qubit.
    #[default]
    PerQubit,
    /// One phase applied to |1⟩ of both qubits.
    Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Convergence {
    pub n_max: [usize; 2],
    pub rtol: f64,
    pub atol: f64,
    pub cutoff: f64,
    pub members: usize,
    /// Largest population found in the top two Fock states.
    pub edge_population: f64,
    /// Largest |norm² + loss − 1| over members.
    pub norm_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub theta: [f64; 2],
    pub rho0000: f64,
    pub rho1111: f64,
    pub rho0011: Complex64,
    /// Qubit density matrix after phases and Hadamard.
    pub rho: Matrix4,
    /// Qubit density matrix straight after the gate.
    pub gate_rho: Matrix4,
    pub converged: bool,
    pub convergence: Convergence,
}

impl FidelityReport {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// ρ_gate[ab][cd] = c_ab c_cd Σ w⟨χ_cd|χ_ab⟩ from the sector Gram matrix G[X][Y] = Σ w⟨χ_X|χ_Y⟩.
pub fn gate_density_from_gram(gram: &Matrix4) -> Matrix4 {
    let c = INPUT_AMPLITUDES;
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for x in 0..4 {
        for y in 0..4 {
            out[x][y] = gram[y][x] * (c[x] * c[y]);
        }
    }
    out
}

/// ρ = M ρ_gate M† with M = (I ⊗ H)·diag(1, e^{iθ₂}, e^{iθ₁}, e^{i(θ₁+θ₂)}).
pub fn rotate(gate_rho: &Matrix4, theta1: f64, theta2: f64) -> Matrix4 {
    let ph = [
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(1.0, theta2),
        Complex64::from_polar(1.0, theta1),
        Complex64::from_polar(1.0, theta1 + theta2),
    ];
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let h = [[s, s, 0.0, 0.0], [s, -s, 0.0, 0.0], [0.0, 0.0, s, s], [0.0, 0.0, s, -s]];
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = ph[c] * h[r][c];
        }
    }
    let mut tmp = [[Complex64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            for k in 0..4 {
                tmp[r][c] += m[r][k] * gate_rho[k][c];
            }
        }
    }
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            for k in 0..4 {
                out[r][c] += tmp[r][k] * m[c][k].conj();
            }
        }
    }
    out
}

/// ℱ = (ρ₀₀₀₀ + ρ₁₁₁₁)/2 + |ρ₀₀₁₁| at fixed phases.
pub fn fidelity_at(gate_rho: &Matrix4, theta1: f64, theta2: f64) -> f64 {
    let r = rotate(gate_rho, theta1, theta2);
    0.5 * (r[0][0].re + r[3][3].re) + r[0][3].norm()
}

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

const GRID: usize = 64;

/// Maximize ℱ over the phase corrections: 64-point grid per axis, then golden-section sweeps.
pub fn bell_fidelity(gate_rho: &Matrix4, mode: PhaseMode) -> FidelityReport {
    let step = TAU / GRID as f64;
    let (mut t1, mut t2, mut best) = (0.0, 0.0, f64::MIN);
    match mode {
        PhaseMode::PerQubit => {
            for i in 0..GRID {
                for j in 0..GRID {
                    let (a, b) = (i as f64 * step, j as f64 * step);
                    let f = fidelity_at(gate_rho, a, b);
                    if f > best {
                        (t1, t2, best) = (a, b, f);
                    }
                }
            }
        }
        PhaseMode::Common => {
            for i in 0..GRID {
                let a = i as f64 * step;
                let f = fidelity_at(gate_rho, a, a);
                if f > best {
                    (t1, t2, best) = (a, a, f);
                }
            }
        }
    }
    let mut converged = false;
    for _ in 0..20 {
        let before = best;
        match mode {
            PhaseMode::PerQubit => {
                let (a, _) = golden_max(|x| fidelity_at(gate_rho, x, t2), t1 - step, t1 + step, 1e-12);
                t1 = a;
                let (b, f) = golden_max(|x| fidelity_at(gate_rho, t1, x), t2 - step, t2 + step, 1e-12);
                t2 = b;
                best = best.max(f);
            }
            PhaseMode::Common => {
                let (a, f) = golden_max(|x| fidelity_at(gate_rho, x, x), t1 - step, t1 + step, 1e-12);
                (t1, t2) = (a, a);
                best = best.max(f);
            }
        }
        if (best - before).abs() < 1e-15 {
            converged = true;
            break;
        }
    }
    let (t1, t2) = (wrap_angle(t1), wrap_angle(t2));
    let rho = rotate(gate_rho, t1, t2);
    FidelityReport {
        fidelity: 0.5 * (rho[0][0].re + rho[3][3].re) + rho[0][3].norm(),
        theta: [t1, t2],
        rho0000: rho[0][0].re,
        rho1111: rho[3][3].re,
        rho0011: rho[0][3],
        rho,
        gate_rho: *gate_rho,
        converged,
        convergence: Convergence::default(),
    }
}

/// Gram matrix of sector phases e^{iφ_X} with unit overlaps (a perfect gate without motion).
pub fn ideal_gram(phases: [f64; 4]) -> Matrix4 {
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for x in 0..4 {
        for y in 0..4 {
            g[x][y] = Complex64::from_polar(1.0, phases[y] - phases[x]);
        }
    }
    g
}
