//! Direct search for adiabatic-gate parameters satisfying the C_Z condition.

use alloc::vec::Vec;

use super::gate::GateSpec;
use super::phases::{adiabaticity_margin, cz_phase_defect_signed, dynamical_phases, propagated_phases, GatePhases};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::ode::Tolerances;

/// Which phases the search objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PhaseModel {
    /// Exact internal-state propagation, including non-adiabatic corrections.
    #[default]
    Propagated,
    /// Integrated adiabatic eigenvalue branches.
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Δ/Ω₀ range.
    pub ratio_bounds: (f64, f64),
    /// δt range in µs; equal ends pin δt.
    pub dt_bounds: (f64, f64),
    pub phase_model: PhaseModel,
    /// Weight of the 1/margin penalty.
    pub penalty: f64,
    pub grid: (usize, usize),
    pub tol: Tolerances,
    /// Defect above which the search reports failure.
    pub accept: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            ratio_bounds: (-1.5, -0.05),
            dt_bounds: (0.1, 0.6),
            phase_model: PhaseModel::Propagated,
            penalty: 1e-4,
            grid: (48, 12),
            tol: Tolerances::new(1e-11, 1e-13),
            accept: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub spec: GateSpec,
    pub defect: f64,
    pub margin: f64,
    pub phases: GatePhases,
    pub evaluations: usize,
}

struct Objective {
    blockade: f64,
    omega0: f64,
    opts: SearchOptions,
    evaluations: usize,
}

struct Eval {
    signed: f64,
    margin: f64,
    phases: GatePhases,
}

impl Objective {
    fn eval(&mut self, ratio: f64, dt: f64) -> Result<Eval> {
        self.evaluations += 1;
        let spec = GateSpec::adiabatic(self.omega0, ratio, dt, self.blockade);
        let env = spec.schedule()?.drives[0].clone();
        let phases = match self.opts.phase_model {
            PhaseModel::Propagated => propagated_phases(&env, self.blockade, &self.opts.tol)?.0,
            PhaseModel::Adiabatic => dynamical_phases(&env, self.blockade)?,
        };
        let signed = cz_phase_defect_signed(phases.phi01, phases.phi10, phases.phi11);
        Ok(Eval { signed, margin: adiabaticity_margin(&env, env.detuning), phases })
    }

    fn cost(&self, e: &Eval) -> f64 {
        e.signed.abs() + self.opts.penalty / e.margin
    }

    fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        let (r, d) = (self.opts.ratio_bounds, self.opts.dt_bounds);
        [p[0].clamp(r.0.min(r.1), r.0.max(r.1)), p[1].clamp(d.0.min(d.1), d.0.max(d.1))]
    }

    /// Bisection on the signed defect in ratio at fixed δt.
    fn root_in_ratio(&mut self, mut a: f64, mut b: f64, mut fa: f64, dt: f64) -> Result<f64> {
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let fm = self.eval(m, dt)?.signed;
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
            if (b - a).abs() < 1e-13 {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || lo == hi {
        return alloc::vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Find (Δ/Ω₀, δt) minimizing the C_Z defect plus a soft 1/margin penalty.
pub fn search_adiabatic_params(blockade: f64, omega0: f64, opts: &SearchOptions) -> Result<SearchResult> {
    if !(blockade > 0.0 && omega0 > 0.0) {
        return Err(Error::InvalidArgument("search needs B > 0 and omega0 > 0".into()));
    }
    let mut obj = Objective { blockade, omega0, opts: *opts, evaluations: 0 };
    let ratios = linspace(opts.ratio_bounds.0, opts.ratio_bounds.1, opts.grid.0.max(2));
    let dts = linspace(opts.dt_bounds.0, opts.dt_bounds.1, opts.grid.1);
    let pinned = dts.len() == 1;

    // Coarse grid, keeping the signed defect for bracketing.
    let mut grid = Vec::with_capacity(ratios.len() * dts.len());
    for &d in &dts {
        for &r in &ratios {
            let e = obj.eval(r, d)?;
            grid.push((r, d, e));
        }
    }

    let mut candidates: Vec<[f64; 2]> = Vec::new();
    // Roots in ratio along every grid row where the defect changes sign away from the ±π wrap.
    for (j, &d) in dts.iter().enumerate() {
        let row = &grid[j * ratios.len()..(j + 1) * ratios.len()];
        let mut brackets = Vec::new();
        for w in row.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if (a.2.signed < 0.0) != (b.2.signed < 0.0) && a.2.signed.abs() < 1.5 && b.2.signed.abs() < 1.5 {
                brackets.push((a.0, b.0, a.2.signed));
            }
        }
        for (a, b, fa) in brackets {
            let r = obj.root_in_ratio(a, b, fa, d)?;
            candidates.push([r, d]);
        }
    }

    if !pinned {
        // Nelder–Mead from the best grid cells, then re-polish in ratio.
        let mut seeds: Vec<usize> = (0..grid.len()).collect();
        seeds.sort_by(|&a, &b| obj.cost(&grid[a].2).total_cmp(&obj.cost(&grid[b].2)));
        let dr = (ratios[1] - ratios[0]).abs();
        let dd = (dts[1] - dts[0]).abs();
        for &s in seeds.iter().take(3) {
            let p = nelder_mead(&mut obj, [grid[s].0, grid[s].1], [dr, dd])?;
            candidates.push(p);
        }
        let mut polished = Vec::new();
        for p in candidates.iter().copied() {
            let f0 = obj.eval(p[0], p[1])?.signed;
            for step in [0.25 * dr, dr] {
                let (a, b) = (p[0] - step, p[0] + step);
                let (fa, fb) = (obj.eval(a, p[1])?.signed, obj.eval(b, p[1])?.signed);
                let pick = if (fa < 0.0) != (f0 < 0.0) && fa.abs() < 1.5 {
                    Some((a, p[0], fa))
                } else if (fb < 0.0) != (f0 < 0.0) && fb.abs() < 1.5 {
                    Some((p[0], b, f0))
                } else {
                    None
                };
                if let Some((a, b, fa)) = pick {
                    polished.push([obj.root_in_ratio(a, b, fa, p[1])?, p[1]]);
                    break;
                }
            }
        }
        candidates.extend(polished);
    }

    let mut best: Option<(f64, [f64; 2], Eval)> = None;
    for p in candidates {
        let e = obj.eval(p[0], p[1])?;
        let c = obj.cost(&e);
        if best.as_ref().is_none_or(|b| c < b.0) {
            best = Some((c, p, e));
        }
    }
    if best.is_none() {
        let i = (0..grid.len()).min_by(|&a, &b| obj.cost(&grid[a].2).total_cmp(&obj.cost(&grid[b].2))).unwrap();
        let (r, d) = (grid[i].0, grid[i].1);
        let e = obj.eval(r, d)?;
        best = Some((obj.cost(&e), [r, d], e));
    }
    let (_, p, e) = best.unwrap();
    if e.signed.abs() > opts.accept {
        return Err(Error::NoSolution { defect: e.signed.abs() });
    }
    Ok(SearchResult {
        spec: GateSpec::adiabatic(omega0, p[0], p[1], blockade),
        defect: e.signed.abs(),
        margin: e.margin,
        phases: e.phases,
        evaluations: obj.evaluations,
    })
}

fn nelder_mead(obj: &mut Objective, x0: [f64; 2], scale: [f64; 2]) -> Result<[f64; 2]> {
    let f = |p: [f64; 2], o: &mut Objective| -> Result<f64> {
        let q = o.clamp(p);
        let e = o.eval(q[0], q[1])?;
        Ok(o.cost(&e))
    };
    let mut s: Vec<([f64; 2], f64)> = Vec::new();
    for p in [x0, [x0[0] + 0.5 * scale[0], x0[1]], [x0[0], x0[1] + 0.5 * scale[1]]] {
        let p = obj.clamp(p);
        let v = f(p, obj)?;
        s.push((p, v));
    }
    for _ in 0..200 {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (s[2].1 - s[0].1).abs() < 1e-12 {
            break;
        }
        let c = [(s[0].0[0] + s[1].0[0]) / 2.0, (s[0].0[1] + s[1].0[1]) / 2.0];
        let worst = s[2].0;
        let at = |t: f64, o: &Objective| o.clamp([c[0] + t * (worst[0] - c[0]), c[1] + t * (worst[1] - c[1])]);
        let xr = at(-1.0, obj);
        let fr = f(xr, obj)?;
        if fr < s[0].1 {
            let xe = at(-2.0, obj);
            let fe = f(xe, obj)?;
            s[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < s[1].1 {
            s[2] = (xr, fr);
        } else {
            let xc = at(0.5, obj);
            let fc = f(xc, obj)?;
            if fc < s[2].1 {
                s[2] = (xc, fc);
            } else {
                for i in 1..3 {
                    let p = obj.clamp([(s[i].0[0] + s[0].0[0]) / 2.0, (s[i].0[1] + s[0].0[1]) / 2.0]);
                    let v = f(p, obj)?;
                    s[i] = (p, v);
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(s[0].0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::TAU;

    #[test]
    fn rejects_zero_rabi_frequency() {
        assert!(search_adiabatic_params(TAU * 4.0, 0.0, &SearchOptions::default()).is_err());
    }

    #[test]
    fn pinned_search_finds_root_near_reference_gate_three() {
        let opts = SearchOptions { ratio_bounds: (-0.4, -0.2), dt_bounds: (0.5, 0.5), grid: (16, 1), ..Default::default() };
        let r = search_adiabatic_params(TAU * 4.0, TAU * 17.0, &opts).unwrap();
        assert!(r.defect < 1e-9, "{}", r.defect);
        let GateSpec::Adiabatic { delta_ratio, .. } = r.spec else { unreachable!() };
        assert!((delta_ratio + 0.3).abs() < 5e-3, "{delta_ratio}");
    }
}
