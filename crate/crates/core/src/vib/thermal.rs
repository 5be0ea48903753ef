//! Thermal Fock-state ensembles.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::math::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Member {
    pub n1: usize,
    pub n2: usize,
    pub weight: f64,
}

/// Boltzmann weights P(n) = (1−q)qⁿ, q = e^{−ω/θ}, for n ≤ n_cap, renormalized over the cap.
pub fn boltzmann(theta: f64, omega: f64, n_cap: usize) -> Vec<f64> {
    if theta <= 0.0 {
        let mut p = alloc::vec![0.0; n_cap + 1];
        p[0] = 1.0;
        return p;
    }
    let q = (-omega / theta).exp();
    let mut p: Vec<f64> = (0..=n_cap).map(|n| q.powi(n as i32)).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    p
}

/// Single-atom distribution truncated once the dropped tail is ≤ `cutoff`, renormalized.
pub fn single_atom(theta: f64, omega: f64, cutoff: f64, n_cap: usize) -> Vec<(usize, f64)> {
    let p = boltzmann(theta, omega, n_cap);
    let mut out = Vec::new();
    let mut acc = 0.0;
    for (n, &w) in p.iter().enumerate() {
        if w == 0.0 {
            break;
        }
        out.push((n, w));
        acc += w;
        if acc >= 1.0 - cutoff {
            break;
        }
    }
    out.iter_mut().for_each(|x| x.1 /= acc);
    out
}

/// Product pairs in decreasing weight until the cumulative weight reaches 1 − cutoff, renormalized.
pub fn thermal_ensemble(theta: f64, omega: f64, cutoff: f64, n_cap: usize) -> Vec<Member> {
    product_ensemble(theta, [omega; 2], cutoff, [n_cap; 2])
}

/// As [`thermal_ensemble`] with separate frequencies and caps per atom.
pub fn product_ensemble(theta: f64, omega: [f64; 2], cutoff: f64, n_cap: [usize; 2]) -> Vec<Member> {
    let p1 = boltzmann(theta, omega[0], n_cap[0]);
    let p2 = boltzmann(theta, omega[1], n_cap[1]);
    let mut pairs: Vec<Member> = Vec::new();
    for (n1, &a) in p1.iter().enumerate() {
        for (n2, &b) in p2.iter().enumerate() {
            if a * b > 0.0 {
                pairs.push(Member { n1, n2, weight: a * b });
            }
        }
    }
    // Stable order: weight, then indices, so runs are reproducible.
    pairs.sort_by(|x, y| y.weight.total_cmp(&x.weight).then(x.n1.cmp(&y.n1)).then(x.n2.cmp(&y.n2)));
    let mut acc = 0.0;
    let mut keep = 0;
    for m in &pairs {
        acc += m.weight;
        keep += 1;
        if acc >= 1.0 - cutoff {
            break;
        }
    }
    pairs.truncate(keep);
    pairs.iter_mut().for_each(|m| m.weight /= acc);
    pairs
}

/// Mean occupation of the untruncated distribution, 1/(e^{ω/θ} − 1).
pub fn mean_occupation(theta: f64, omega: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    1.0 / (omega / theta).exp_m1()
}

/// Largest n in a distribution plus a margin that keeps kicked states inside the basis.
pub fn suggested_n_max(theta: f64, omega: f64, cutoff: f64, eta: f64) -> usize {
    let top = single_atom(theta, omega, cutoff, 4000).last().map_or(0, |m| m.0);
    let spread = (4.0 * eta.abs() * ((top + 1) as f64).sqrt()).ceil() as usize;
    top + 6 + 2 * spread
}
