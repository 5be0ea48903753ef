//! Dense density-matrix propagation with the dark-state jump term.
//!
//! Independent of the amplitude engines: operators are built in the ordinary
//! Fock basis as complex matrices, and ρ = X + iY is integrated directly.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::engine::GateHamiltonian;
use super::fidelity::{Matrix4, INPUT_AMPLITUDES};
use super::fock::build_displacement;
use super::thermal::thermal_ensemble;
use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::ode::{Dopri5, Stats, Tolerances};
use crate::protocols::gate::Schedule;

/// Largest Hilbert-space dimension the dense solver accepts.
pub const DENSE_LIMIT: usize = 256;

/// Internal levels per atom: qubit 0, qubit 1, Rydberg, dark.
const Q0: usize = 0;
const Q1: usize = 1;
const RYD: usize = 2;
const DARK: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladResult {
    pub dim: usize,
    pub n: [usize; 2],
    /// Final ρ, row-major, index ((i₁·N₁ + v₁)·4 + i₂)·N₂ + v₂.
    pub rho: Vec<Complex64>,
    /// Vibration-traced qubit block, ordered 00, 01, 10, 11.
    pub gate_rho: Matrix4,
    pub trace: f64,
    pub stats: Stats,
}

impl LindbladResult {
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.rho[r * self.dim + c]
    }
}

struct Model {
    dim: usize,
    n: [usize; 2],
    gamma: f64,
    h0: [Vec<f64>; 2],
    drive: [[Vec<f64>; 2]; 2],
}

impl Model {
    fn idx(&self, i1: usize, v1: usize, i2: usize, v2: usize) -> usize {
        ((i1 * self.n[0] + v1) * 4 + i2) * self.n[1] + v2
    }

    fn build(ham: &GateHamiltonian, schedule: &Schedule) -> Result<Self> {
        let n = [ham.atoms[0].dim(), ham.atoms[1].dim()];
        let dim = 16 * n[0] * n[1];
        if dim > DENSE_LIMIT {
            return Err(Error::DimensionGuard { dim, limit: DENSE_LIMIT });
        }
        let mut m = Model {
            dim,
            n,
            gamma: ham.gamma,
            h0: [vec![0.0; dim * dim], vec![0.0; dim * dim]],
            drive: [[vec![0.0; dim * dim], vec![0.0; dim * dim]], [vec![0.0; dim * dim], vec![0.0; dim * dim]]],
        };
        // Single-atom motional Hamiltonians in the ordinary basis.
        let motion: Vec<Vec<f64>> = ham
            .atoms
            .iter()
            .map(|a| {
                let d = a.dim();
                let mut h = vec![0.0; d * d];
                for v in 0..d {
                    h[v * d + v] = if a.trap_on { a.omega * (v as f64 + 0.5) } else { 0.25 * a.omega * (2 * v + 1) as f64 };
                    if !a.trap_on && v + 2 < d {
                        let k = -0.25 * a.omega * (((v + 1) * (v + 2)) as f64).sqrt();
                        h[v * d + v + 2] = k;
                        h[(v + 2) * d + v] = k;
                    }
                }
                h
            })
            .collect();
        let disp: Vec<_> = ham.atoms.iter().map(|a| build_displacement(a.n_max, a.lamb_dicke())).collect();
        let pos: Vec<Vec<f64>> = ham
            .atoms
            .iter()
            .map(|a| {
                let d = a.dim();
                let s = a.position_scale();
                let mut y = vec![0.0; d * d];
                for v in 0..d.saturating_sub(1) {
                    let e = s * ((v + 1) as f64).sqrt();
                    y[v * d + v + 1] = e;
                    y[(v + 1) * d + v] = e;
                }
                y
            })
            .collect();
        let det = [schedule.drives[0].detuning, schedule.drives[1].detuning];
        let dim_ = dim;
        let [hr, hi] = &mut m.h0;
        let (n1, n2) = (n[0], n[1]);
        let at = |i1: usize, v1: usize, i2: usize, v2: usize| ((i1 * n1 + v1) * 4 + i2) * n2 + v2;
        for i1 in 0..4 {
            for i2 in 0..4 {
                let mut e = 0.0;
                let mut nr = 0.0;
                if i1 == RYD {
                    e += det[0];
                    nr += 1.0;
                }
                if i2 == RYD {
                    e += det[1];
                    nr += 1.0;
                }
                if i1 == RYD && i2 == RYD {
                    e += ham.blockade;
                }
                for v1 in 0..n1 {
                    for v2 in 0..n2 {
                        let r = at(i1, v1, i2, v2);
                        hr[r * dim_ + r] += e;
                        hi[r * dim_ + r] -= 0.5 * ham.gamma * nr;
                        for w1 in 0..n1 {
                            let c = at(i1, w1, i2, v2);
                            hr[r * dim_ + c] += motion[0][v1 * n1 + w1];
                        }
                        for w2 in 0..n2 {
                            let c = at(i1, v1, i2, w2);
                            hr[r * dim_ + c] += motion[1][v2 * n2 + w2];
                        }
                        if let (Some(g), RYD, RYD) = (ham.gradient, i1, i2) {
                            let k = ham.blockade * g;
                            for w1 in 0..n1 {
                                hr[r * dim_ + at(i1, w1, i2, v2)] -= k * pos[0][v1 * n1 + w1];
                            }
                            for w2 in 0..n2 {
                                hr[r * dim_ + at(i1, v1, i2, w2)] += k * pos[1][v2 * n2 + w2];
                            }
                        }
                    }
                }
            }
        }
        // (1/2)(e^{iKx}|R⟩⟨1| + h.c.) for each atom; Ω(t) multiplies at run time.
        for atom in 0..2 {
            let [vr, vi] = &mut m.drive[atom];
            let d = &disp[atom];
            for other in 0..4 {
                for vo in 0..n[1 - atom] {
                    for va in 0..n[atom] {
                        for wa in 0..n[atom] {
                            let z = 0.5 * d.get(va, wa);
                            let (r, c) = if atom == 0 {
                                (at(RYD, va, other, vo), at(Q1, wa, other, vo))
                            } else {
                                (at(other, vo, RYD, va), at(other, vo, Q1, wa))
                            };
                            vr[r * dim_ + c] += z.re;
                            vi[r * dim_ + c] += z.im;
                            vr[c * dim_ + r] += z.re;
                            vi[c * dim_ + r] -= z.im;
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// ρ̇ for ρ = X + iY with H_eff = Hr + iHi:
    /// Ẋ = HrY + HiX − YHrᵀ + XHiᵀ + J(X), Ẏ = −HrX + HiY + XHrᵀ + YHiᵀ + J(Y).
    fn rhs(&self, omega: [f64; 2], y: &[f64], dy: &mut [f64], h: &mut [Vec<f64>; 2]) {
        let d = self.dim;
        let l = d * d;
        for part in 0..2 {
            h[part].copy_from_slice(&self.h0[part]);
            for (atom, &w) in omega.iter().enumerate() {
                if w != 0.0 {
                    for (dst, src) in h[part].iter_mut().zip(&self.drive[atom][part]) {
                        *dst += w * src;
                    }
                }
            }
        }
        let (x, yy) = y.split_at(l);
        let (dx, dyy) = dy.split_at_mut(l);
        dx.fill(0.0);
        dyy.fill(0.0);
        let [hr, hi] = &*h;
        mm(d, 1.0, hr, false, yy, false, dx);
        mm(d, 1.0, hi, false, x, false, dx);
        mm(d, -1.0, yy, false, hr, true, dx);
        mm(d, 1.0, x, false, hi, true, dx);
        mm(d, -1.0, hr, false, x, false, dyy);
        mm(d, 1.0, hi, false, yy, false, dyy);
        mm(d, 1.0, x, false, hr, true, dyy);
        mm(d, 1.0, yy, false, hi, true, dyy);
        if self.gamma > 0.0 {
            self.jump(x, dx);
            self.jump(yy, dyy);
        }
    }

    /// Γ Σⱼ Lⱼ ρ Lⱼ† with Lⱼ = |d⟩⟨R| on atom j.
    fn jump(&self, src: &[f64], dst: &mut [f64]) {
        let d = self.dim;
        let [n1, n2] = self.n;
        for o in 0..4 {
            for o2 in 0..4 {
                for v in 0..n1 {
                    for w in 0..n2 {
                        for v2 in 0..n1 {
                            for w2 in 0..n2 {
                                // Atom 1 decays.
                                let (r, c) = (self.idx(RYD, v, o, w), self.idx(RYD, v2, o2, w2));
                                let (rd, cd) = (self.idx(DARK, v, o, w), self.idx(DARK, v2, o2, w2));
                                dst[rd * d + cd] += self.gamma * src[r * d + c];
                                // Atom 2 decays.
                                let (r, c) = (self.idx(o, v, RYD, w), self.idx(o2, v2, RYD, w2));
                                let (rd, cd) = (self.idx(o, v, DARK, w), self.idx(o2, v2, DARK, w2));
                                dst[rd * d + cd] += self.gamma * src[r * d + c];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// dst(d×d) += alpha · op(A) · op(B).
fn mm(d: usize, alpha: f64, a: &[f64], ta: bool, b: &[f64], tb: bool, dst: &mut [f64]) {
    let di = d as isize;
    let (rsa, csa) = if ta { (1, di) } else { (di, 1) };
    let (rsb, csb) = if tb { (1, di) } else { (di, 1) };
    assert!(a.len() >= d * d && b.len() >= d * d && dst.len() >= d * d);
    // SAFETY: all three buffers hold d×d elements and dst is a distinct borrow.
    unsafe {
        matrixmultiply::dgemm(d, d, d, alpha, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, 1.0, dst.as_mut_ptr(), di, 1);
    }
}

/// Propagate |in⟩⟨in| ⊗ ρ_thermal(θ) through `schedule` with the full master equation.
///
/// The thermal state is truncated to the basis and renormalized, as in the ensemble engines
/// with a zero weight cutoff.
pub fn lindblad_evolve(ham: &GateHamiltonian, schedule: &Schedule, theta: f64, tol: &Tolerances) -> Result<LindbladResult> {
    ham.validate()?;
    let model = Model::build(ham, schedule)?;
    let d = model.dim;
    let l = d * d;
    let mut y = vec![0.0; 2 * l];
    let n_cap = ham.atoms[0].n_max.min(ham.atoms[1].n_max);
    let ens = thermal_ensemble(theta, ham.atoms[0].omega, 0.0, n_cap);
    let qubit = [(Q0, Q0), (Q0, Q1), (Q1, Q0), (Q1, Q1)];
    for m in &ens {
        for (x, &(a, b)) in qubit.iter().enumerate() {
            for (z, &(c, e)) in qubit.iter().enumerate() {
                let r = model.idx(a, m.n1, b, m.n2);
                let col = model.idx(c, m.n1, e, m.n2);
                y[r * d + col] += m.weight * INPUT_AMPLITUDES[x] * INPUT_AMPLITUDES[z];
            }
        }
    }
    let mut solver = Dopri5::new(2 * l);
    let mut h = [vec![0.0; l], vec![0.0; l]];
    let mut stats = Stats::default();
    let cuts = schedule.breakpoints();
    for w in cuts.windows(2) {
        let on = [schedule.driven_in(0, w[0], w[1]), schedule.driven_in(1, w[0], w[1])];
        let f = |t: f64, y: &[f64], dy: &mut [f64]| {
            let omega = [0, 1].map(|j| if on[j] { schedule.drives[j].omega(t) } else { 0.0 });
            model.rhs(omega, y, dy, &mut h);
        };
        stats += solver.integrate(f, w[0], w[1], &mut y, tol)?;
    }
    let rho: Vec<Complex64> = (0..l).map(|i| Complex64::new(y[i], y[l + i])).collect();
    let trace = (0..d).map(|i| rho[i * d + i].re).sum();
    let mut gate_rho = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (x, &(a, b)) in qubit.iter().enumerate() {
        for (z, &(c, e)) in qubit.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for v1 in 0..model.n[0] {
                for v2 in 0..model.n[1] {
                    s += rho[model.idx(a, v1, b, v2) * d + model.idx(c, v1, e, v2)];
                }
            }
            gate_rho[x][z] = s;
        }
    }
    Ok(LindbladResult { dim: d, n: model.n, rho, gate_rho, trace, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::TAU;
    use crate::protocols::gate::GateSpec;
    use crate::units::PhysicalSetup;
    use crate::vib::fidelity::gate_density_from_gram;
    use crate::vib::run::{evolve_member, gram, EngineChoice, VibOptions};

    fn small_case(trap_on: bool) -> (GateHamiltonian, Schedule, f64) {
        let mut s = PhysicalSetup::cesium();
        s.trap_freq_parallel = 50e3;
        s.trap_on = trap_on;
        s.temperature = 2e-6;
        s.rydberg_lifetime = 3.0;
        let spec = GateSpec::PiTwoPiPi { omega1_max: None, omega2_max: None, tau1: 0.6, dt1: 0.1, dt2: 0.15 };
        let mut ham = GateHamiltonian::axial(&s, 2, TAU * 4.0);
        // A larger kick makes the motional entanglement visible at this basis size.
        ham.atoms.iter_mut().for_each(|a| a.kick *= 3.0);
        (ham, spec.schedule().unwrap(), s.thermal_angular())
    }

    #[test]
    fn dimension_guard() {
        let mut ham = GateHamiltonian::internal_only(0.0, 1.0);
        ham.atoms.iter_mut().for_each(|a| a.n_max = 4);
        let sched = GateSpec::pi_2pi_pi_default().schedule().unwrap();
        assert!(matches!(lindblad_evolve(&ham, &sched, 0.0, &Tolerances::default()), Err(Error::DimensionGuard { dim: 400, .. })));
    }

    #[test]
    fn matches_ensemble_engines_with_decay() {
        let tol = Tolerances::new(1e-11, 1e-13);
        for trap_on in [true, false] {
            let (ham, sched, theta) = small_case(trap_on);
            let lind = lindblad_evolve(&ham, &sched, theta, &tol).unwrap();
            assert!((lind.trace - 1.0).abs() < 1e-10, "trace {}", lind.trace);
            for engine in [EngineChoice::General, EngineChoice::Factorized] {
                let opts = VibOptions { cutoff: 0.0, tol, engine, ..Default::default() };
                let (g, _) = gram(&ham, &sched, theta, &opts).unwrap();
                let ens = gate_density_from_gram(&g);
                for x in 0..4 {
                    for y in 0..4 {
                        let diff = (ens[x][y] - lind.gate_rho[x][y]).norm();
                        assert!(diff < 1e-8, "{trap_on} {engine:?} {x}{y}: {diff:e}");
                    }
                }
            }
        }
    }

    #[test]
    fn unitary_case_reproduces_pure_state_populations() {
        let (mut ham, sched, _) = small_case(true);
        ham.gamma = 0.0;
        let tol = Tolerances::new(1e-11, 1e-13);
        let lind = lindblad_evolve(&ham, &sched, 0.0, &tol).unwrap();
        let pure = evolve_member(&ham, &sched, 0, 0, 1.0, &tol).unwrap();
        for (i, a) in pure.amplitudes.iter().enumerate() {
            assert!((lind.get(i, i).re - a.norm_sqr()).abs() < 1e-9, "{i}");
        }
    }
}
