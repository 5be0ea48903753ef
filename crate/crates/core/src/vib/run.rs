//! Gate simulations: ensemble set-up, engine selection and the fidelity report.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::engine::{gram_from_sectors, run_sector, AtomOps, Batch, GateHamiltonian, Propagator, SectorResult, Slot, SECTORS};
use super::fidelity::{bell_fidelity, gate_density_from_gram, Convergence, FidelityReport, Matrix4, PhaseMode, INPUT_AMPLITUDES};
use super::thermal::{product_ensemble, single_atom, suggested_n_max};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::ode::Tolerances;
use crate::protocols::envelope::PulseEnvelope;
use crate::protocols::gate::{GateSpec, Schedule};
use crate::units::PhysicalSetup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EngineChoice {
    /// Factorized path when no two drives overlap in time, else the general engine.
    #[default]
    Auto,
    General,
    Factorized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibOptions {
    /// Highest Fock state per atom; `None` picks one from the temperature and kick.
    pub n_max: Option<usize>,
    /// Ensemble weight left out of the thermal sum.
    pub cutoff: f64,
    pub tol: Tolerances,
    pub phase_mode: PhaseMode,
    pub engine: EngineChoice,
    /// Include photon kicks (K ≠ 0).
    pub kicks: bool,
    /// Include Rydberg decay.
    pub radiative: bool,
    /// Pair shift for gates that do not carry one (rad/µs); defaults to the setup's.
    pub blockade: Option<f64>,
}

impl Default for VibOptions {
    fn default() -> Self {
        Self {
            n_max: None,
            cutoff: 1e-3,
            tol: Tolerances::new(1e-10, 1e-12),
            phase_mode: PhaseMode::PerQubit,
            engine: EngineChoice::Auto,
            kicks: true,
            radiative: true,
            blockade: None,
        }
    }
}

/// Axial Hamiltonian for `spec` under `opts`, with the basis size resolved.
pub fn axial_hamiltonian(setup: &PhysicalSetup, spec: &GateSpec, opts: &VibOptions) -> GateHamiltonian {
    let blockade = spec.blockade_or(opts.blockade.unwrap_or_else(|| setup.blockade_internal()));
    let mut ham = GateHamiltonian::axial(setup, 0, blockade);
    if !opts.kicks {
        ham.atoms.iter_mut().for_each(|a| a.kick = 0.0);
    }
    if !opts.radiative {
        ham.gamma = 0.0;
    }
    let n_max = opts.n_max.unwrap_or_else(|| {
        suggested_n_max(setup.thermal_angular(), ham.atoms[0].omega, opts.cutoff, ham.atoms[0].lamb_dicke())
    });
    ham.atoms.iter_mut().for_each(|a| a.n_max = n_max);
    ham
}

/// Population allowed in the top two Fock states before an automatic basis is enlarged.
pub const EDGE_LIMIT: f64 = 1e-10;
const N_MAX_CAP: usize = 400;

/// Full-dynamics Bell fidelity of `spec` with axial kicks at the setup's temperature.
///
/// With `opts.n_max = None` the basis grows by half until the edge population is below [`EDGE_LIMIT`].
pub fn simulate_gate(setup: &PhysicalSetup, spec: &GateSpec, opts: &VibOptions) -> Result<FidelityReport> {
    setup.validate()?;
    let schedule = spec.schedule()?;
    let mut ham = axial_hamiltonian(setup, spec, opts);
    loop {
        let report = simulate(&ham, &schedule, setup.thermal_angular(), opts)?;
        let n = ham.atoms[0].n_max;
        if opts.n_max.is_some() || report.convergence.edge_population <= EDGE_LIMIT || n >= N_MAX_CAP {
            return Ok(report);
        }
        let grown = (n + n / 2).min(N_MAX_CAP);
        ham.atoms.iter_mut().for_each(|a| a.n_max = grown);
    }
}

/// Bell fidelity for an explicit Hamiltonian and schedule with a thermal ensemble at θ = k_BT/ħ.
pub fn simulate(ham: &GateHamiltonian, schedule: &Schedule, theta: f64, opts: &VibOptions) -> Result<FidelityReport> {
    let (gram, conv) = gram(ham, schedule, theta, opts)?;
    let mut report = bell_fidelity(&gate_density_from_gram(&gram), opts.phase_mode);
    report.convergence = conv;
    Ok(report)
}

/// Sector Gram matrix Σ w⟨χ_X|χ_Y⟩ and the convergence record.
pub fn gram(ham: &GateHamiltonian, schedule: &Schedule, theta: f64, opts: &VibOptions) -> Result<(Matrix4, Convergence)> {
    ham.validate()?;
    if !(opts.cutoff >= 0.0 && opts.cutoff < 1.0) {
        return Err(Error::InvalidArgument("ensemble cutoff must lie in [0, 1)".into()));
    }
    let factorized = match opts.engine {
        EngineChoice::General => false,
        EngineChoice::Factorized => true,
        EngineChoice::Auto => schedule.is_sequential() && ham.gradient.is_none(),
    };
    if factorized {
        factorized_gram(ham, schedule, theta, opts)
    } else {
        general_gram(ham, schedule, theta, opts)
    }
}

fn ops_for(ham: &GateHamiltonian) -> [AtomOps; 2] {
    [AtomOps::new(&ham.atoms[0]), AtomOps::new(&ham.atoms[1])]
}

fn general_gram(ham: &GateHamiltonian, schedule: &Schedule, theta: f64, opts: &VibOptions) -> Result<(Matrix4, Convergence)> {
    let ops = ops_for(ham);
    let ens = product_ensemble(theta, [ham.atoms[0].omega, ham.atoms[1].omega], opts.cutoff, [ham.atoms[0].n_max, ham.atoms[1].n_max]);
    let members: Vec<(usize, usize)> = ens.iter().map(|m| (m.n1, m.n2)).collect();
    let weights: Vec<f64> = ens.iter().map(|m| m.weight).collect();
    let mut results: Vec<SectorResult> = Vec::with_capacity(4);
    for q in SECTORS {
        results.push(run_sector(ham, [&ops[0], &ops[1]], schedule, q, &members, &opts.tol)?.0);
    }
    let results: [SectorResult; 4] = results.try_into().map_err(|_| Error::InvalidArgument("sector count".into()))?;
    let conv = Convergence {
        n_max: [ham.atoms[0].n_max, ham.atoms[1].n_max],
        rtol: opts.tol.rtol,
        atol: opts.tol.atol,
        cutoff: opts.cutoff,
        members: members.len(),
        edge_population: results.iter().map(|r| r.edge_population).fold(0.0, f64::max),
        norm_residual: results.iter().map(|r| r.norm_residual).fold(0.0, f64::max),
    };
    Ok((gram_from_sectors(&results, &weights), conv))
}

/// Evolved amplitudes of one member over the full internal basis {0, 1, R, d} per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub n: [usize; 2],
    /// Index ((i₁·N₁ + v₁)·4 + i₂)·N₂ + v₂ with i ∈ {0, 1, R, d}.
    pub amplitudes: Vec<Complex64>,
    pub weight: f64,
    /// Population lost to the dark state.
    pub loss: f64,
    /// τ_R and τ_RR accumulated in the |11⟩ sector.
    pub tau_r: f64,
    pub tau_rr: f64,
}

impl EvolutionState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Evolve H₁H₂|11⟩ ⊗ |n₁ n₂⟩ through the schedule.
pub fn evolve_member(ham: &GateHamiltonian, schedule: &Schedule, n1: usize, n2: usize, weight: f64, tol: &Tolerances) -> Result<EvolutionState> {
    ham.validate()?;
    let ops = ops_for(ham);
    let n = [ops[0].n, ops[1].n];
    let mut amps = vec![Complex64::new(0.0, 0.0); 16 * n[0] * n[1]];
    let (mut loss, mut tau_r, mut tau_rr) = (0.0, 0.0, 0.0);
    for (k, q) in SECTORS.iter().enumerate() {
        let c = INPUT_AMPLITUDES[k];
        let (res, state) = run_sector(ham, [&ops[0], &ops[1]], schedule, *q, &[(n1, n2)], tol)?;
        loss += c * c * res.loss[0];
        if *q == [1, 1] {
            tau_r = 0.5 * (res.rydberg_time[0][0] + res.rydberg_time[0][1]);
            tau_rr = res.rydberg_time[0][2];
        }
        for s1 in 0..state.levels[0] {
            for s2 in 0..state.levels[1] {
                let i1 = if s1 == 0 { q[0] as usize } else { 2 };
                let i2 = if s2 == 0 { q[1] as usize } else { 2 };
                for v1 in 0..n[0] {
                    for v2 in 0..n[1] {
                        let dst = ((i1 * n[0] + v1) * 4 + i2) * n[1] + v2;
                        amps[dst] = state.get(state.index(s1, s2, v1, v2, 0)) * c;
                    }
                }
            }
        }
    }
    Ok(EvolutionState { n, amplitudes: amps, weight, loss, tau_r, tau_rr })
}

/// A product α ⊗ β of single-atom batches; each batch is `[s][v][column]` with levels {g, R}.
#[derive(Clone)]
struct Term {
    parts: [Batch; 2],
}

struct Factorized<'a> {
    ham: &'a GateHamiltonian,
    ops: [AtomOps; 2],
    dummy: AtomOps,
    schedule: &'a Schedule,
    tol: Tolerances,
}

impl Factorized<'_> {
    fn evolve(&self, part: &mut Batch, atom: usize, drive: Option<&PulseEnvelope>, shift: f64, a: f64, b: f64) -> Result<()> {
        let slot = Slot { ops: &self.ops[atom], detuning: self.schedule.drives[atom].detuning, shift, drive };
        let none = Slot { ops: &self.dummy, detuning: 0.0, shift: 0.0, drive: None };
        let prop = Propagator { slots: [slot, none], gamma: self.ham.gamma, blockade: 0.0, gradient: None };
        prop.advance(part, a, b, &mut None, &self.tol)?;
        Ok(())
    }

    fn segment(&self, terms: Vec<Term>, active: [bool; 2], a: f64, b: f64) -> Result<Vec<Term>> {
        let driven = [active[0] && self.schedule.driven_in(0, a, b), active[1] && self.schedule.driven_in(1, a, b)];
        if driven[0] && driven[1] {
            return Err(Error::OverlappingDrives { t: a });
        }
        let blockade = self.ham.blockade;
        let mut out = Vec::with_capacity(2 * terms.len());
        for term in terms {
            if let Some(j) = (0..2).find(|&j| driven[j]) {
                // The driven atom sees +B on R whenever its partner is definitely in R.
                let o = 1 - j;
                for s in 0..2 {
                    let mut other = term.parts[o].project(0, s);
                    if other.is_zero() {
                        continue;
                    }
                    let mut mine = term.parts[j].clone();
                    self.evolve(&mut mine, j, Some(&self.schedule.drives[j]), if s == 1 { blockade } else { 0.0 }, a, b)?;
                    self.evolve(&mut other, o, None, 0.0, a, b)?;
                    let parts = if j == 0 { [mine, other] } else { [other, mine] };
                    out.push(Term { parts });
                }
            } else {
                let r0 = term.parts[0].project(0, 1);
                let r1 = term.parts[1].project(0, 1);
                if r0.is_zero() || r1.is_zero() || blockade == 0.0 {
                    let mut t = term;
                    self.evolve(&mut t.parts[0], 0, None, 0.0, a, b)?;
                    self.evolve(&mut t.parts[1], 1, None, 0.0, a, b)?;
                    out.push(t);
                    continue;
                }
                // Both atoms may sit in R: split so the pair shift lands on the |RR⟩ product only.
                for s0 in 0..2 {
                    let p0 = term.parts[0].project(0, s0);
                    if p0.is_zero() {
                        continue;
                    }
                    for s1 in 0..2 {
                        let mut p1 = term.parts[1].project(0, s1);
                        if p1.is_zero() {
                            continue;
                        }
                        let mut q0 = p0.clone();
                        self.evolve(&mut q0, 0, None, if s1 == 1 { blockade } else { 0.0 }, a, b)?;
                        self.evolve(&mut p1, 1, None, 0.0, a, b)?;
                        out.push(Term { parts: [q0, p1] });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Σ_b w_b Σ_v conj(x[g,v,b]) y[g,v,b] for single-atom batches.
fn ground_overlap(x: &Batch, y: &Batch, weights: &[f64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    let c = x.cols;
    for v in 0..x.n[0] {
        for (b, w) in weights.iter().enumerate().take(c) {
            let i = x.index(0, 0, v, 0, b);
            s += x.get(i).conj() * y.get(i) * *w;
        }
    }
    s
}

fn factorized_gram(ham: &GateHamiltonian, schedule: &Schedule, theta: f64, opts: &VibOptions) -> Result<(Matrix4, Convergence)> {
    let ops = ops_for(ham);
    let dummy = AtomOps::new(&super::engine::AtomModel { n_max: 0, omega: 1.0, trap_on: true, kick: 0.0, hbar_over_mass: 1.0 });
    let f = Factorized { ham, ops, dummy, schedule, tol: opts.tol };
    let dists: [Vec<(usize, f64)>; 2] = [0, 1].map(|j| single_atom(theta, ham.atoms[j].omega, opts.cutoff, ham.atoms[j].n_max));
    let weights: [Vec<f64>; 2] = [0, 1].map(|j| dists[j].iter().map(|d| d.1).collect());
    let initial = |j: usize| {
        let mut part = Batch::zeros([2, 1], [f.ops[j].n, 1], dists[j].len());
        for (b, &(n, _)) in dists[j].iter().enumerate() {
            let i = part.index(0, 0, n, 0, b);
            part.set(i, Complex64::new(1.0, 0.0));
        }
        part
    };
    let cuts = schedule.breakpoints();
    let mut finals: Vec<Vec<Term>> = Vec::with_capacity(4);
    let mut edge: f64 = 0.0;
    for q in SECTORS {
        let active = [q[0] == 1, q[1] == 1];
        let mut terms = vec![Term { parts: [initial(0), initial(1)] }];
        for w in cuts.windows(2) {
            terms = f.segment(terms, active, w[0], w[1])?;
        }
        for t in terms.iter_mut() {
            edge = edge.max(t.parts[0].edge_population()).max(t.parts[1].edge_population());
            t.parts = [t.parts[0].project(0, 0), t.parts[1].project(0, 0)];
        }
        terms.retain(|t| !t.parts[0].is_zero() && !t.parts[1].is_zero());
        finals.push(terms);
    }
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for x in 0..4 {
        for y in x..4 {
            let mut s = Complex64::new(0.0, 0.0);
            for tx in &finals[x] {
                for ty in &finals[y] {
                    s += ground_overlap(&tx.parts[0], &ty.parts[0], &weights[0]) * ground_overlap(&tx.parts[1], &ty.parts[1], &weights[1]);
                }
            }
            g[x][y] = s;
            g[y][x] = s.conj();
        }
    }
    let conv = Convergence {
        n_max: [ham.atoms[0].n_max, ham.atoms[1].n_max],
        rtol: opts.tol.rtol,
        atol: opts.tol.atol,
        cutoff: opts.cutoff,
        members: dists[0].len() * dists[1].len(),
        edge_population: edge,
        norm_residual: 0.0,
    };
    Ok((g, conv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{PI, TAU};
    use crate::protocols::envelope::PulseEnvelope;

    fn small_setup(f_khz: f64) -> PhysicalSetup {
        let mut s = PhysicalSetup::cesium();
        s.trap_freq_parallel = f_khz * 1e3;
        s
    }

    #[test]
    fn free_evolution_keeps_number_populations() {
        let s = small_setup(50.0);
        let ham = GateHamiltonian::axial(&s, 6, s.blockade_internal());
        let env = PulseEnvelope::zero();
        let sched = Schedule { t_start: 0.0, t_end: 3.0, drives: [env.clone(), env] };
        let st = evolve_member(&ham, &sched, 2, 3, 1.0, &Tolerances::default()).unwrap();
        let n = st.n;
        // All population stays in |v1 = 2, v2 = 3⟩ of the qubit states, with norm 1 and no loss.
        let mut p = 0.0;
        for i1 in 0..2 {
            for i2 in 0..2 {
                p += st.amplitudes[((i1 * n[0] + 2) * 4 + i2) * n[1] + 3].norm_sqr();
            }
        }
        assert!((p - 1.0).abs() < 1e-14);
        assert_eq!(st.loss, 0.0);
    }

    #[test]
    fn norm_ledger_with_decay_and_kicks() {
        let mut s = small_setup(50.0);
        s.rydberg_lifetime = 2.0;
        let spec = GateSpec::reference_adiabatic(3);
        let ham = GateHamiltonian::axial(&s, 5, spec.blockade_or(0.0));
        let sched = spec.schedule().unwrap();
        let st = evolve_member(&ham, &sched, 1, 0, 1.0, &Tolerances::new(1e-12, 1e-14)).unwrap();
        assert!(st.loss > 1e-3);
        assert!((st.norm_sqr() + st.loss - 1.0).abs() < 1e-9, "{}", st.norm_sqr() + st.loss - 1.0);
    }

    #[test]
    fn without_kicks_motion_decouples() {
        // K = 0 leaves only the finite-blockade error of the internal dynamics.
        let s = small_setup(50.0);
        let spec = GateSpec::pi_2pi_pi_default();
        let opts = VibOptions { n_max: Some(3), kicks: false, ..Default::default() };
        let r = simulate_gate(&s, &spec, &opts).unwrap();
        let ham = GateHamiltonian::internal_only(s.decay_rate(), s.blockade_internal());
        let bare = simulate(&ham, &spec.schedule().unwrap(), 0.0, &opts).unwrap();
        assert!((r.fidelity - bare.fidelity).abs() < 1e-9, "{} {}", r.fidelity, bare.fidelity);
        // Decay dominates: Γ(τ₁/2 + τ₂/4) with τ₁ the π-pulse spacing and τ₂ the 2π effective time.
        let est = crate::analytic::infidelity_radiative(s.decay_rate(), 1.0044, 0.2071);
        assert!((bare.infidelity() / est - 1.0).abs() < 0.02, "{} {est}", bare.infidelity());
    }

    #[test]
    fn factorized_and_general_engines_agree() {
        let mut s = small_setup(50.0);
        s.temperature = 3e-6;
        s.rydberg_lifetime = 20.0;
        // Small blockade keeps the general engine cheap and makes the |RR⟩ bookkeeping matter.
        let spec = GateSpec::PiTwoPiPi { omega1_max: None, omega2_max: None, tau1: 0.6, dt1: 0.1, dt2: 0.15 };
        let base = VibOptions { n_max: Some(8), cutoff: 1e-2, blockade: Some(TAU * 3.0), tol: Tolerances::new(1e-11, 1e-13), ..Default::default() };
        let ham = axial_hamiltonian(&s, &spec, &base);
        let sched = spec.schedule().unwrap();
        let theta = s.thermal_angular();
        let (gf, _) = gram(&ham, &sched, theta, &VibOptions { engine: EngineChoice::Factorized, cutoff: 0.0, ..base }).unwrap();
        let (gg, _) = gram(&ham, &sched, theta, &VibOptions { engine: EngineChoice::General, cutoff: 0.0, ..base }).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert!((gf[x][y] - gg[x][y]).norm() < 1e-8, "{x}{y}: {} {}", gf[x][y], gg[x][y]);
            }
        }
    }

    #[test]
    fn trap_off_mode_runs_and_differs_from_trap_on() {
        let mut s = small_setup(100.0);
        let opts = VibOptions { n_max: Some(10), radiative: false, ..Default::default() };
        let on = simulate_gate(&s, &GateSpec::pi_2pi_pi_default(), &opts).unwrap();
        s.trap_on = false;
        let off = simulate_gate(&s, &GateSpec::pi_2pi_pi_default(), &opts).unwrap();
        assert!(off.infidelity() > 0.0 && on.infidelity() > 0.0);
        assert!((off.infidelity() - on.infidelity()).abs() > 1e-3 * on.infidelity());
        let _ = PI;
    }
}
