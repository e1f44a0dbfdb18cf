//! Weighted counts of `n`-cylinders without good average expansion.
//!
//! Each fiber contributes two letters: `j = 1` with multiplicity `a = p`
//! and contraction `b = σ⁻¹`, and `j = 0` with `a = q`, `b = L`. The count
//! `W_n(α) = Σ ∏ a(j_i)` runs over words whose mean `log b` is at least
//! `−α`. A dynamic programme over the lattice-rounded prefix sum of
//! `log b` evaluates it; near the threshold, short words are recounted
//! exhaustively.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::fiber::BranchData;

/// Lattice spacing of the prefix sums.
pub const LATTICE: f64 = 1e-6;

/// Largest length recounted exhaustively when the lattice is ambiguous.
pub const EXHAUSTIVE_MAX_N: usize = 20;

/// Combinatorial data of one fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderFiber {
    pub p: u64,
    pub q: u64,
    pub sigma_inv: f64,
    pub l: f64,
}

impl CylinderFiber {
    pub fn new(p: u64, q: u64, sigma: f64, l: f64) -> Self {
        Self { p, q, sigma_inv: 1.0 / sigma, l }
    }

    /// `σ⁻¹ p + L q`.
    pub fn combinatorial_sum(&self) -> f64 {
        self.sigma_inv * self.p as f64 + self.l * self.q as f64
    }

    /// `(a, log b)` per letter; letters with `a = 0` never contribute.
    fn letters(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        [(self.p, self.sigma_inv), (self.q, self.l)].into_iter().filter(|&(a, _)| a > 0).map(|(a, b)| (a as f64, b, b.ln()))
    }
}

impl From<BranchData> for CylinderFiber {
    fn from(d: BranchData) -> Self {
        Self { p: d.p as u64, q: d.q as u64, sigma_inv: d.sigma.map_or(0.0, |s| 1.0 / s), l: d.l }
    }
}

/// Count at one length together with the bound `e^{(C+α+ε)n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderCount {
    pub n: usize,
    pub alpha: f64,
    /// `W_n(α)`.
    pub w: f64,
    /// `Σ ∏ a(j_i) b(j_i)` over all words.
    pub weighted_total: f64,
    /// `(1/n) log W`.
    pub rate: f64,
    /// `e^{(C+α+ε)n}` with `C` the window mean of `log(σ⁻¹p+Lq)`.
    pub bound: f64,
    pub bound_holds: bool,
    /// Whether the exhaustive recount was used.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct State {
    count: f64,
    weight: f64,
}

/// Exhaustive `W_n(α)` over all words of the given fibers.
pub fn cylinder_count_exhaustive(fibers: &[CylinderFiber], alpha: f64) -> f64 {
    let threshold = -alpha * fibers.len() as f64;
    let mut total = 0.0;
    let mut stack: Vec<(usize, f64, f64)> = vec![(0, 0.0, 1.0)];
    while let Some((depth, sum, prod)) = stack.pop() {
        if depth == fibers.len() {
            if sum >= threshold {
                total += prod;
            }
            continue;
        }
        for (a, _, lb) in fibers[depth].letters() {
            stack.push((depth + 1, sum + lb, prod * a));
        }
    }
    total
}

fn summary(fibers: &[CylinderFiber], states: &BTreeMap<i64, State>, alpha: f64, eps: f64) -> CylinderCount {
    let n = fibers.len();
    let nf = n as f64;
    let threshold = -alpha * nf;
    let band = nf * LATTICE;
    let mut w = 0.0;
    let mut weighted_total = 0.0;
    let mut ambiguous = false;
    for (&key, s) in states {
        let v = key as f64 * LATTICE;
        weighted_total += s.weight;
        if v >= threshold + band {
            w += s.count;
        } else if v > threshold - band && s.count > 0.0 {
            ambiguous = true;
            if v >= threshold {
                w += s.count;
            }
        }
    }
    let exhaustive = ambiguous && n <= EXHAUSTIVE_MAX_N;
    if exhaustive {
        w = cylinder_count_exhaustive(fibers, alpha);
    }
    let c = fibers.iter().map(|f| f.combinatorial_sum().ln()).sum::<f64>() / nf;
    let log_bound = (c + alpha + eps) * nf;
    CylinderCount {
        n,
        alpha,
        w,
        weighted_total,
        rate: w.ln() / nf,
        bound: log_bound.exp(),
        bound_holds: w.ln() <= log_bound,
        exhaustive,
    }
}

/// `W_n(α)` for every prefix length `n = 1..=fibers.len()`.
pub fn cylinder_series(fibers: &[CylinderFiber], alpha: f64, eps: f64) -> Vec<CylinderCount> {
    let mut states: BTreeMap<i64, State> = BTreeMap::new();
    states.insert(0, State { count: 1.0, weight: 1.0 });
    let mut out = Vec::with_capacity(fibers.len());
    for (i, f) in fibers.iter().enumerate() {
        let mut next: BTreeMap<i64, State> = BTreeMap::new();
        for (&key, s) in &states {
            for (a, b, lb) in f.letters() {
                let e = next.entry(key + (lb / LATTICE).round() as i64).or_default();
                e.count += s.count * a;
                e.weight += s.weight * a * b;
            }
        }
        states = next;
        out.push(summary(&fibers[..=i], &states, alpha, eps));
    }
    out
}

/// `W_n(α)` with `n = fibers.len()`.
pub fn cylinder_count_dp(fibers: &[CylinderFiber], alpha: f64, eps: f64) -> CylinderCount {
    assert!(!fibers.is_empty(), "cylinder counts need at least one fiber");
    cylinder_series(fibers, alpha, eps).pop().expect("non-empty series")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(n: usize) -> Vec<CylinderFiber> {
        vec![CylinderFiber::new(1, 1, 2.0, 1.0); n]
    }

    #[test]
    fn mp_single_step() {
        let c = cylinder_count_dp(&mp(1), 0.1, 0.05);
        assert_eq!(c.w, 1.0);
    }

    #[test]
    fn infinite_alpha_counts_all_words() {
        let f = vec![CylinderFiber::new(2, 1, 3.0, 1.1), CylinderFiber::new(1, 1, 2.0, 1.0), CylinderFiber::new(3, 2, 5.0, 0.9)];
        assert_eq!(cylinder_count_dp(&f, f64::INFINITY, 0.0).w, 3.0 * 2.0 * 5.0);
    }

    #[test]
    fn weighted_total_is_product() {
        let f: Vec<_> = (0..30).map(|i| CylinderFiber::new(1 + i % 3, 1 + i % 2, 2.0 + 0.1 * i as f64, 1.0 + 0.01 * i as f64)).collect();
        let c = cylinder_count_dp(&f, 0.1, 0.05);
        let prod: f64 = f.iter().map(|x| x.combinatorial_sum()).product();
        assert!((c.weighted_total / prod - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mp_counts_are_binomial_tails() {
        // With b ∈ {1/2, 1}, a word qualifies iff its number k of ones
        // satisfies k log 2 ≤ α n.
        for n in 1..=12usize {
            let alpha = 0.2;
            let kmax = (alpha * n as f64 / 2f64.ln()).floor() as u64;
            let expect: u64 = (0..=kmax.min(n as u64)).map(|k| binom(n as u64, k)).sum();
            assert_eq!(cylinder_count_dp(&mp(n), alpha, 0.05).w, expect as f64, "n={n}");
        }
    }

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn empty_letters_are_skipped() {
        let f = vec![CylinderFiber::new(0, 1, f64::INFINITY, 1.2); 4];
        let c = cylinder_count_dp(&f, 0.0, 0.0);
        assert_eq!(c.w, 1.0);
        assert!((c.weighted_total - 1.2f64.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn series_matches_single_counts() {
        let f = mp(8);
        let s = cylinder_series(&f, 0.3, 0.05);
        for n in 1..=8 {
            assert_eq!(s[n - 1], cylinder_count_dp(&f[..n], 0.3, 0.05));
        }
    }
}
