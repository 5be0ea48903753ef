//! Pure-state propagation under the non-Hermitian effective Hamiltonian.
//!
//! A state holds one or two atoms, each with internal levels {g, R} (or g
//! alone when its qubit is |0⟩) and a truncated Fock space, for a batch of
//! ensemble members stored as columns. The layout is
//! `[s1][s2][v1][v2][column]`, real and imaginary parts stored separately.
//! All Hamiltonian matrices are real in the twisted basis, so the right-hand
//! side is a handful of real matrix products.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::fock::{displacement_twisted, kinetic_offdiag, lamb_dicke, position_offdiag};
use crate::error::{Error, Result};
use crate::linalg::gemm_acc;
#[allow(unused_imports)]
use crate::math::Float;
use crate::ode::{Dopri5, Stats, Tolerances};
use crate::protocols::envelope::PulseEnvelope;
use crate::protocols::gate::Schedule;
use crate::units::PhysicalSetup;

/// One atom's motional model along the simulated axis.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AtomModel {
    /// Highest Fock state kept; the basis has n_max + 1 states.
    pub n_max: usize,
    pub omega: f64,
    pub trap_on: bool,
    /// Photon wave number along the axis (rad/µm).
    pub kick: f64,
    pub hbar_over_mass: f64,
}

impl AtomModel {
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn lamb_dicke(&self) -> f64 {
        lamb_dicke(self.kick, self.omega, self.hbar_over_mass)
    }

    /// Zero-point spread √(ħ/2Mω) in µm.
    pub fn position_scale(&self) -> f64 {
        (self.hbar_over_mass / (2.0 * self.omega)).sqrt()
    }
}

/// Everything except the drive envelopes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GateHamiltonian {
    pub atoms: [AtomModel; 2],
    /// Rydberg decay rate Γ (rad/µs) into the dark state.
    pub gamma: f64,
    /// Pair shift B (rad/µs) of |RR⟩.
    pub blockade: f64,
    /// c in H₂ = B[1 + c(y₂ − y₁)]|RR⟩⟨RR|, y in µm; only with zero kicks.
    pub gradient: Option<f64>,
}

impl GateHamiltonian {
    /// Axial motion along the beams with the setup's effective kick.
    pub fn axial(setup: &PhysicalSetup, n_max: usize, blockade: f64) -> Self {
        let atom = AtomModel {
            n_max,
            omega: setup.omega_parallel(),
            trap_on: setup.trap_on,
            kick: setup.effective_wavevector().k,
            hbar_over_mass: setup.hbar_over_mass(),
        };
        Self { atoms: [atom; 2], gamma: setup.decay_rate(), blockade, gradient: None }
    }

    /// Transverse motion along the interatomic axis with the linearized pair-shift gradient
    /// −6σ/r₁₂, σ = ±1 selecting the sign convention of the pair phase.
    pub fn transverse(setup: &PhysicalSetup, n_max: usize, blockade: f64, sign: f64) -> Self {
        let atom = AtomModel {
            n_max,
            omega: setup.omega_perp(),
            trap_on: setup.trap_on,
            kick: 0.0,
            hbar_over_mass: setup.hbar_over_mass(),
        };
        Self { atoms: [atom; 2], gamma: setup.decay_rate(), blockade, gradient: Some(-6.0 * sign / setup.r12) }
    }

    /// Transverse motion reduced to the relative coordinate (y₁ − y₂)/√2, carried on atom 1.
    ///
    /// With equal traps and no kicks the centre of mass decouples exactly. Atom 1's position
    /// scale is enlarged by √2 so that its position operator is y₁ − y₂; atom 2 keeps one Fock state.
    pub fn transverse_relative(setup: &PhysicalSetup, n_max: usize, blockade: f64, sign: f64) -> Self {
        let mut ham = Self::transverse(setup, n_max, blockade, sign);
        ham.atoms[0].hbar_over_mass *= 2.0;
        ham.atoms[1].n_max = 0;
        ham
    }

    /// Internal states only: one Fock state, no kick.
    pub fn internal_only(gamma: f64, blockade: f64) -> Self {
        let atom = AtomModel { n_max: 0, omega: 1.0, trap_on: true, kick: 0.0, hbar_over_mass: 1.0 };
        Self { atoms: [atom; 2], gamma, blockade, gradient: None }
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !(a.omega > 0.0) || !a.kick.is_finite() || !(a.hbar_over_mass > 0.0) {
                return Err(Error::InvalidArgument("atom model needs omega > 0 and finite kick".into()));
            }
        }
        if !(self.gamma >= 0.0) || !self.blockade.is_finite() {
            return Err(Error::InvalidArgument("decay rate must be >= 0 and blockade finite".into()));
        }
        if self.gradient.is_some() && self.atoms.iter().any(|a| a.kick != 0.0) {
            return Err(Error::InvalidArgument("pair-shift gradient needs zero photon kicks".into()));
        }
        Ok(())
    }
}

/// Precomputed operators of one atom.
#[derive(Debug, Clone)]
pub(crate) struct AtomOps {
    pub n: usize,
    pub diag: Vec<f64>,
    /// m ↔ m+2 kinetic couplings when the trap is off (twisted basis if kicked, else ordinary).
    pub kin: Vec<f64>,
    pub disp: Option<Vec<f64>>,
    /// m ↔ m+1 position couplings (µm).
    pub pos: Vec<f64>,
}

impl AtomOps {
    pub fn new(a: &AtomModel) -> Self {
        let n = a.dim();
        let eta = a.lamb_dicke();
        let (diag, kin) = if a.trap_on {
            ((0..n).map(|v| a.omega * (v as f64 + 0.5)).collect(), Vec::new())
        } else {
            // Without a kick the ordinary basis is used, where a² + a†² enters with a minus sign.
            let mut kin = kinetic_offdiag(a.n_max, a.omega);
            if eta == 0.0 {
                kin.iter_mut().for_each(|k| *k = -*k);
            }
            ((0..n).map(|v| 0.25 * a.omega * (2.0 * v as f64 + 1.0)).collect(), kin)
        };
        let disp = if eta == 0.0 { None } else { Some(displacement_twisted(a.n_max, eta)) };
        Self { n, diag, kin, disp, pos: position_offdiag(a.n_max, a.position_scale()) }
    }
}

/// Per-slot configuration of a propagation.
#[derive(Clone, Copy)]
pub(crate) struct Slot<'a> {
    pub ops: &'a AtomOps,
    pub detuning: f64,
    /// Extra energy on R (pair shift from a partner frozen in R).
    pub shift: f64,
    pub drive: Option<&'a PulseEnvelope>,
}

pub(crate) const ACCUMULATORS: usize = 4;

/// Batched state: amplitudes plus per-column loss and Rydberg-time accumulators.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Batch {
    pub levels: [usize; 2],
    pub n: [usize; 2],
    pub cols: usize,
    /// [re | im | loss | ∫P_R1 | ∫P_R2 | ∫P_RR].
    pub y: Vec<f64>,
}

impl Batch {
    pub fn zeros(levels: [usize; 2], n: [usize; 2], cols: usize) -> Self {
        let l = levels[0] * levels[1] * n[0] * n[1] * cols;
        Self { levels, n, cols, y: vec![0.0; 2 * l + ACCUMULATORS * cols] }
    }

    pub fn len(&self) -> usize {
        self.levels[0] * self.levels[1] * self.n[0] * self.n[1] * self.cols
    }

    #[inline]
    pub fn index(&self, s1: usize, s2: usize, v1: usize, v2: usize, b: usize) -> usize {
        (((s1 * self.levels[1] + s2) * self.n[0] + v1) * self.n[1] + v2) * self.cols + b
    }

    pub fn get(&self, i: usize) -> Complex64 {
        Complex64::new(self.y[i], self.y[self.len() + i])
    }

    pub fn set(&mut self, i: usize, v: Complex64) {
        let l = self.len();
        self.y[i] = v.re;
        self.y[l + i] = v.im;
    }

    /// Accumulator `k` ∈ {0: loss, 1: ∫P_R1, 2: ∫P_R2, 3: ∫P_RR} of column `b`.
    pub fn acc(&self, k: usize, b: usize) -> f64 {
        self.y[2 * self.len() + k * self.cols + b]
    }

    pub fn column_norm_sqr(&self, b: usize) -> f64 {
        let l = self.len();
        (0..l / self.cols).map(|r| {
            let i = r * self.cols + b;
            self.y[i] * self.y[i] + self.y[l + i] * self.y[l + i]
        }).sum()
    }

    /// Keep only internal level `s` of `atom` (zeroing the rest); accumulators are cleared.
    pub fn project(&self, atom: usize, s: usize) -> Self {
        let mut out = self.clone();
        let l = self.len();
        for s1 in 0..self.levels[0] {
            for s2 in 0..self.levels[1] {
                let keep = if atom == 0 { s1 == s } else { s2 == s };
                if keep {
                    continue;
                }
                let start = self.index(s1, s2, 0, 0, 0);
                let width = self.n[0] * self.n[1] * self.cols;
                out.y[start..start + width].fill(0.0);
                out.y[l + start..l + start + width].fill(0.0);
            }
        }
        out.y[2 * l..].fill(0.0);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.y[..2 * self.len()].iter().all(|&v| v == 0.0)
    }

    /// Largest per-column population in the top two Fock states of either atom.
    pub fn edge_population(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in 0..self.cols {
            let mut p = 0.0;
            for s1 in 0..self.levels[0] {
                for s2 in 0..self.levels[1] {
                    for v1 in 0..self.n[0] {
                        for v2 in 0..self.n[1] {
                            let top1 = self.n[0] > 2 && v1 + 2 >= self.n[0];
                            let top2 = self.n[1] > 2 && v2 + 2 >= self.n[1];
                            if top1 || top2 {
                                p += self.get(self.index(s1, s2, v1, v2, b)).norm_sqr();
                            }
                        }
                    }
                }
            }
            worst = worst.max(p);
        }
        worst
    }
}

pub(crate) struct Propagator<'a> {
    pub slots: [Slot<'a>; 2],
    pub gamma: f64,
    pub blockade: f64,
    pub gradient: Option<f64>,
}

impl Propagator<'_> {
    fn free_diagonal_only(&self) -> bool {
        self.slots.iter().all(|s| s.drive.is_none() && s.ops.kin.is_empty()) && self.gradient.is_none()
    }

    #[inline]
    fn level_energy(&self, s1: usize, s2: usize) -> (f64, f64) {
        let mut e = 0.0;
        let mut nr = 0.0;
        if s1 == 1 {
            e += self.slots[0].detuning + self.slots[0].shift;
            nr += 1.0;
        }
        if s2 == 1 {
            e += self.slots[1].detuning + self.slots[1].shift;
            nr += 1.0;
        }
        if s1 == 1 && s2 == 1 {
            e += self.blockade;
        }
        (e, nr)
    }

    fn rhs(&self, shape: &Batch, t: f64, y: &[f64], dy: &mut [f64]) {
        let l = shape.len();
        let c = shape.cols;
        let [d1, d2] = shape.levels;
        let [n1, n2] = shape.n;
        let n2c = n2 * c;
        let blk = n1 * n2c;
        let (yr, rest) = y.split_at(l);
        let yi = &rest[..l];
        let (dr, rest) = dy.split_at_mut(l);
        let (di, dacc) = rest.split_at_mut(l);
        let o1 = self.slots[0].ops;
        let o2 = self.slots[1].ops;

        // Diagonal energies and decay.
        for s1 in 0..d1 {
            for s2 in 0..d2 {
                let (e_int, nr) = self.level_energy(s1, s2);
                let dec = 0.5 * self.gamma * nr;
                for v1 in 0..n1 {
                    let e1 = e_int + o1.diag[v1];
                    for v2 in 0..n2 {
                        let e = e1 + o2.diag[v2];
                        let base = shape.index(s1, s2, v1, v2, 0);
                        for i in base..base + c {
                            dr[i] = e * yi[i] - dec * yr[i];
                            di[i] = -e * yr[i] - dec * yi[i];
                        }
                    }
                }
            }
        }

        // Kinetic couplings with the trap off.
        for (m, &k) in o1.kin.iter().enumerate() {
            for s in 0..d1 * d2 {
                let a = s * blk + m * n2c;
                let b = s * blk + (m + 2) * n2c;
                for j in 0..n2c {
                    dr[a + j] += k * yi[b + j];
                    dr[b + j] += k * yi[a + j];
                    di[a + j] -= k * yr[b + j];
                    di[b + j] -= k * yr[a + j];
                }
            }
        }
        for (m, &k) in o2.kin.iter().enumerate() {
            for row in 0..d1 * d2 * n1 {
                let a = row * n2c + m * c;
                let b = row * n2c + (m + 2) * c;
                for j in 0..c {
                    dr[a + j] += k * yi[b + j];
                    dr[b + j] += k * yi[a + j];
                    di[a + j] -= k * yr[b + j];
                    di[b + j] -= k * yr[a + j];
                }
            }
        }

        // Laser couplings (Ω/2)(D|R⟩⟨g| + Dᵀ|g⟩⟨R|).
        if d1 == 2 {
            if let Some(env) = self.slots[0].drive {
                let a = 0.5 * env.omega(t);
                if a != 0.0 {
                    for s2 in 0..d2 {
                        let g = shape.index(0, s2, 0, 0, 0);
                        let r = shape.index(1, s2, 0, 0, 0);
                        couple(o1.disp.as_deref(), n1, n2c, a, yr, yi, dr, di, g, r, n2c);
                    }
                }
            }
        }
        if d2 == 2 {
            if let Some(env) = self.slots[1].drive {
                let a = 0.5 * env.omega(t);
                if a != 0.0 {
                    for s1 in 0..d1 {
                        for v1 in 0..n1 {
                            let g = shape.index(s1, 0, v1, 0, 0);
                            let r = shape.index(s1, 1, v1, 0, 0);
                            couple(o2.disp.as_deref(), n2, c, a, yr, yi, dr, di, g, r, c);
                        }
                    }
                }
            }
        }

        // Linear pair-shift gradient B·c·(y₂ − y₁) on |RR⟩.
        if let (Some(grad), 2, 2) = (self.gradient, d1, d2) {
            let k = self.blockade * grad;
            let rr = shape.index(1, 1, 0, 0, 0);
            for (m, &p) in o1.pos.iter().enumerate() {
                let a = rr + m * n2c;
                let b = rr + (m + 1) * n2c;
                let w = -k * p;
                for j in 0..n2c {
                    dr[a + j] += w * yi[b + j];
                    dr[b + j] += w * yi[a + j];
                    di[a + j] -= w * yr[b + j];
                    di[b + j] -= w * yr[a + j];
                }
            }
            for v1 in 0..n1 {
                let row = rr + v1 * n2c;
                for (m, &p) in o2.pos.iter().enumerate() {
                    let a = row + m * c;
                    let b = row + (m + 1) * c;
                    let w = k * p;
                    for j in 0..c {
                        dr[a + j] += w * yi[b + j];
                        dr[b + j] += w * yi[a + j];
                        di[a + j] -= w * yr[b + j];
                        di[b + j] -= w * yr[a + j];
                    }
                }
            }
        }

        // Loss rate and Rydberg populations per column.
        dacc.fill(0.0);
        for s1 in 0..d1 {
            for s2 in 0..d2 {
                if s1 == 0 && s2 == 0 {
                    continue;
                }
                let base = shape.index(s1, s2, 0, 0, 0);
                for r in 0..n1 * n2 {
                    for b in 0..c {
                        let i = base + r * c + b;
                        let p = yr[i] * yr[i] + yi[i] * yi[i];
                        dacc[b] += self.gamma * (s1 + s2) as f64 * p;
                        if s1 == 1 {
                            dacc[c + b] += p;
                        }
                        if s2 == 1 {
                            dacc[2 * c + b] += p;
                        }
                        if s1 == 1 && s2 == 1 {
                            dacc[3 * c + b] += p;
                        }
                    }
                }
            }
        }
    }

    /// Exact step for diagonal Hamiltonians (trap on, no drive, no gradient).
    fn free_step(&self, state: &mut Batch, dt: f64) {
        let l = state.len();
        let c = state.cols;
        let [d1, d2] = state.levels;
        let [n1, n2] = state.n;
        let o1 = self.slots[0].ops;
        let o2 = self.slots[1].ops;
        for s1 in 0..d1 {
            for s2 in 0..d2 {
                let (e_int, nr) = self.level_energy(s1, s2);
                let rate = self.gamma * nr;
                let decay = (-0.5 * rate * dt).exp();
                let kept = decay * decay;
                let time = if rate > 0.0 { -(-rate * dt).exp_m1() / rate } else { dt };
                for v1 in 0..n1 {
                    for v2 in 0..n2 {
                        let ph = Complex64::from_polar(decay, -(e_int + o1.diag[v1] + o2.diag[v2]) * dt);
                        let base = state.index(s1, s2, v1, v2, 0);
                        for b in 0..c {
                            let i = base + b;
                            let z = Complex64::new(state.y[i], state.y[l + i]);
                            let p = z.norm_sqr();
                            let w = z * ph;
                            state.y[i] = w.re;
                            state.y[l + i] = w.im;
                            let acc = 2 * l;
                            state.y[acc + b] += p * (1.0 - kept);
                            if s1 == 1 {
                                state.y[acc + c + b] += p * time;
                            }
                            if s2 == 1 {
                                state.y[acc + 2 * c + b] += p * time;
                            }
                            if s1 == 1 && s2 == 1 {
                                state.y[acc + 3 * c + b] += p * time;
                            }
                        }
                    }
                }
            }
        }
    }

    /// Propagate `state` over [t0, t1] (no drive changes character inside).
    pub fn advance(&self, state: &mut Batch, t0: f64, t1: f64, ode: &mut Option<Dopri5>, tol: &Tolerances) -> Result<Stats> {
        if t1 == t0 {
            return Ok(Stats::default());
        }
        if self.free_diagonal_only() {
            self.free_step(state, t1 - t0);
            return Ok(Stats::default());
        }
        let n = state.y.len();
        let solver = match ode {
            Some(s) if s.len() == n => s,
            _ => ode.insert(Dopri5::new(n)),
        };
        let shape = Batch { levels: state.levels, n: state.n, cols: state.cols, y: Vec::new() };
        solver.integrate(|t, y, dy| self.rhs(&shape, t, y, dy), t0, t1, &mut state.y, tol)
    }
}

/// dR += a·D·g, dg += a·Dᵀ·R for real and imaginary parts (i.e. −i·H applied).
#[allow(clippy::too_many_arguments)]
fn couple(disp: Option<&[f64]>, n: usize, cols: usize, a: f64, yr: &[f64], yi: &[f64], dr: &mut [f64], di: &mut [f64], g: usize, r: usize, stride: usize) {
    match disp {
        Some(d) => {
            gemm_acc(n, n, cols, a, d, false, &yi[g..], stride, &mut dr[r..], stride);
            gemm_acc(n, n, cols, -a, d, false, &yr[g..], stride, &mut di[r..], stride);
            gemm_acc(n, n, cols, a, d, true, &yi[r..], stride, &mut dr[g..], stride);
            gemm_acc(n, n, cols, -a, d, true, &yr[r..], stride, &mut di[g..], stride);
        }
        None => {
            let len = n * stride;
            for j in 0..len {
                dr[r + j] += a * yi[g + j];
                di[r + j] -= a * yr[g + j];
                dr[g + j] += a * yi[r + j];
                di[g + j] -= a * yr[r + j];
            }
        }
    }
}

/// Run `state` through the schedule, switching drives per segment.
pub(crate) fn run_schedule(
    ham: &GateHamiltonian,
    ops: [&AtomOps; 2],
    schedule: &Schedule,
    active: [bool; 2],
    state: &mut Batch,
    tol: &Tolerances,
) -> Result<Stats> {
    let cuts = schedule.breakpoints();
    let mut ode = None;
    let mut stats = Stats::default();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slot = |j: usize| Slot {
            ops: ops[j],
            detuning: schedule.drives[j].detuning,
            shift: 0.0,
            drive: (active[j] && schedule.driven_in(j, a, b)).then_some(&schedule.drives[j]),
        };
        let prop = Propagator { slots: [slot(0), slot(1)], gamma: ham.gamma, blockade: ham.blockade, gradient: ham.gradient };
        stats += prop.advance(state, a, b, &mut ode, tol)?;
    }
    Ok(stats)
}

/// Final amplitudes of one qubit sector for a batch of members, projected onto the qubit levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorResult {
    /// Qubit values (a, b) of the sector.
    pub qubits: [u8; 2],
    /// Projected amplitudes, `[v1][v2][member]`.
    pub amplitudes: Vec<Complex64>,
    pub n: [usize; 2],
    pub loss: Vec<f64>,
    pub rydberg_time: Vec<[f64; 3]>,
    pub edge_population: f64,
    pub norm_residual: f64,
    pub stats: Stats,
}

/// Evolve the initial Fock products of `members` (n₁, n₂) in sector `qubits` through the schedule.
pub(crate) fn run_sector(
    ham: &GateHamiltonian,
    ops: [&AtomOps; 2],
    schedule: &Schedule,
    qubits: [u8; 2],
    members: &[(usize, usize)],
    tol: &Tolerances,
) -> Result<(SectorResult, Batch)> {
    let levels = [1 + qubits[0] as usize, 1 + qubits[1] as usize];
    let n = [ops[0].n, ops[1].n];
    let mut state = Batch::zeros(levels, n, members.len());
    for (b, &(n1, n2)) in members.iter().enumerate() {
        if n1 >= n[0] || n2 >= n[1] {
            return Err(Error::InvalidArgument("ensemble member outside the Fock basis".into()));
        }
        let i = state.index(0, 0, n1, n2, b);
        state.set(i, Complex64::new(1.0, 0.0));
    }
    let active = [qubits[0] == 1, qubits[1] == 1];
    let stats = run_schedule(ham, ops, schedule, active, &mut state, tol)?;
    let cols = members.len();
    let mut amps = Vec::with_capacity(n[0] * n[1] * cols);
    for v1 in 0..n[0] {
        for v2 in 0..n[1] {
            for b in 0..cols {
                amps.push(state.get(state.index(0, 0, v1, v2, b)));
            }
        }
    }
    let mut residual: f64 = 0.0;
    let mut loss = Vec::with_capacity(cols);
    let mut ryd = Vec::with_capacity(cols);
    for b in 0..cols {
        residual = residual.max((state.column_norm_sqr(b) + state.acc(0, b) - 1.0).abs());
        loss.push(state.acc(0, b));
        ryd.push([state.acc(1, b), state.acc(2, b), state.acc(3, b)]);
    }
    let result = SectorResult {
        qubits,
        amplitudes: amps,
        n,
        loss,
        rydberg_time: ryd,
        edge_population: state.edge_population(),
        norm_residual: residual,
        stats,
    };
    Ok((result, state))
}

pub(crate) const SECTORS: [[u8; 2]; 4] = [[0, 0], [0, 1], [1, 0], [1, 1]];

/// Σ_members w ⟨χ_X|χ_Y⟩ over the four sectors from general-engine results.
pub(crate) fn gram_from_sectors(results: &[SectorResult; 4], weights: &[f64]) -> [[Complex64; 4]; 4] {
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    let cols = weights.len();
    for x in 0..4 {
        for y in x..4 {
            let (a, b) = (&results[x].amplitudes, &results[y].amplitudes);
            let mut s = Complex64::new(0.0, 0.0);
            for (ca, cb) in a.chunks(cols).zip(b.chunks(cols)) {
                for ((u, v), w) in ca.iter().zip(cb).zip(weights) {
                    s += u.conj() * v * *w;
                }
            }
            g[x][y] = s;
            g[y][x] = s.conj();
        }
    }
    g
}
