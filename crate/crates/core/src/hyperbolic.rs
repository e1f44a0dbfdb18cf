//! Expansion sequences, Pliss times and hyperbolic times along random orbits.
//!
//! For an orbit `x_j = f^j_ω(x₀)` with `a_j = log|f'_{θ^j ω}(x_j)|`, an
//! integer `n ≥ 1` is a γ-hyperbolic time when every block of `k` derivatives
//! ending at step `n-1` expands by at least `e^{γk}`:
//! `Σ_{j=n-k}^{n-1} a_j ≥ γk` for `1 ≤ k ≤ n`. This is the Pliss condition on
//! the sequence `(a_0, a_1, …)` with `c₂ = γ`, so it is detected by a single
//! prefix-sum scan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::base::{mean_stderr, BaseSample};
use crate::error::{Error, Result};
use crate::fiber::ModelSpec;
use crate::space::Grid;
use crate::transfer::EigenTriple;

/// Tolerance used when comparing accumulated log-derivatives.
pub const LOG_TOL: f64 = 1e-10;

/// An orbit with its expansion sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRecord {
    /// `x_0, …, x_n`.
    pub x: Vec<f64>,
    /// `a_0, …, a_{n-1}`.
    pub a: Vec<f64>,
    /// Detected hyperbolic times (empty until [`OrbitRecord::with_times`]).
    pub times: Vec<usize>,
    pub gamma: Option<f64>,
}

impl OrbitRecord {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// The record with its γ-hyperbolic times filled in.
    pub fn with_times(mut self, gamma: f64) -> Self {
        self.times = hyperbolic_times(&self, gamma);
        self.gamma = Some(gamma);
        self
    }

    /// Birkhoff average of the expansion sequence.
    pub fn mean_expansion(&self) -> f64 {
        self.a.iter().sum::<f64>() / self.a.len().max(1) as f64
    }
}

/// Orbit of length `n` from `x0` along `θ^j ω`.
pub fn expansion_sequence(model: &ModelSpec, sample: &BaseSample, x0: f64, n: usize) -> Result<OrbitRecord> {
    let mut x = Vec::with_capacity(n + 1);
    let mut a = Vec::with_capacity(n);
    let mut cur = x0;
    x.push(cur);
    for j in 0..n as i64 {
        let map = model.fiber_at(sample, j)?;
        a.push(map.deriv(cur).ln());
        cur = map.eval(cur);
        x.push(cur);
    }
    Ok(OrbitRecord { x, a, times: Vec::new(), gamma: None })
}

/// ξ = (c₂ − c₁)/(A − c₁).
pub fn pliss_fraction(c1: f64, c2: f64, big_a: f64) -> f64 {
    (c2 - c1) / (big_a - c1)
}

/// Indices `n_i ∈ [1, N]` (1-based, `a_1 = a[0]`) with
/// `Σ_{j=n+1}^{n_i} a_j ≥ c₂(n_i − n)` for all `0 ≤ n < n_i`, and ξ.
pub fn pliss_times(a: &[f64], c1: f64, c2: f64, big_a: f64) -> Result<(Vec<usize>, f64)> {
    if !(big_a >= c2 && c2 > c1 && c1 > 0.0) {
        return Err(Error::Precondition(format!("need A >= c2 > c1 > 0, got A={big_a}, c2={c2}, c1={c1}")));
    }
    if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| **v > big_a) {
        return Err(Error::Precondition(format!("a[{i}] = {v} exceeds A = {big_a}")));
    }
    Ok((pliss_scan(a, c2), pliss_fraction(c1, c2, big_a)))
}

/// Single pass: `n` qualifies iff the prefix sum of `a_j − c₂` at `n` is at
/// least every earlier prefix sum.
fn pliss_scan(a: &[f64], c2: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut s = 0.0;
    let mut best = 0.0_f64;
    for (i, &v) in a.iter().enumerate() {
        s += v - c2;
        if s >= best - LOG_TOL {
            out.push(i + 1);
        }
        best = best.max(s);
    }
    out
}

/// Reference check of the Pliss inequality by direct block sums.
pub fn pliss_times_brute(a: &[f64], c2: f64) -> Vec<usize> {
    (1..=a.len())
        .filter(|&ni| (0..ni).all(|n| a[n..ni].iter().sum::<f64>() >= c2 * (ni - n) as f64 - LOG_TOL))
        .collect()
}

/// γ-hyperbolic times of a record by the linear scan.
pub fn hyperbolic_times(record: &OrbitRecord, gamma: f64) -> Vec<usize> {
    pliss_scan(&record.a, gamma)
}

/// γ-hyperbolic times by checking every block sum (quadratic reference).
pub fn hyperbolic_times_by_definition(record: &OrbitRecord, gamma: f64) -> Vec<usize> {
    let a = &record.a;
    (1..=a.len())
        .filter(|&n| {
            let mut acc = 0.0;
            (1..=n).all(|k| {
                acc += a[n - k];
                acc >= gamma * k as f64 - LOG_TOL
            })
        })
        .collect()
}

/// Fraction of `[1, n]` occupied by `times`.
pub fn ht_density(times: &[usize], n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if times.iter().any(|&t| t == 0 || t > n) {
        return Err(Error::Precondition(format!("times must lie in [1, {n}]")));
    }
    Ok(times.len() as f64 / n as f64)
}

/// Draw a point from node weights: inverse CDF on the nodes followed by a
/// uniform position inside the node's cell.
pub fn sample_from_weights(grid: &Grid, cdf: &[f64], u: f64, v: f64) -> f64 {
    let total = *cdf.last().unwrap_or(&1.0);
    let target = u * total;
    let k = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
    let (lo, hi) = grid.cell(k);
    let x = lo + v * (hi - lo);
    match grid.boundary {
        crate::space::Boundary::Periodic => x.rem_euclid(1.0),
        crate::space::Boundary::Clamped => x.clamp(0.0, 1.0),
    }
}

/// Cumulative sums of node weights.
pub fn cumulative_weights(w: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    w.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// ν_ω-mass of `{x : (1/n) Σ_{j<n} a_j ≤ α}` by sampling from the ν₀ grid weights.
pub fn empirical_exceptional_mass(
    triple: &EigenTriple,
    model: &ModelSpec,
    alpha: f64,
    n: usize,
    sample_size: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n == 0 || sample_size == 0 {
        return Err(Error::Precondition("need n >= 1 and a positive sample size".into()));
    }
    if !triple.sample.covers(0, n as i64 - 1) {
        let (lo, hi) = triple.sample.window();
        return Err(Error::OutOfWindow { k: n as i64 - 1, lo, hi });
    }
    let cdf = cumulative_weights(&triple.nu[0]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<f64> =
        (0..sample_size).map(|_| sample_from_weights(&triple.grid, &cdf, rng.random(), rng.random())).collect();
    let maps: Vec<_> = (0..n as i64).map(|j| model.fiber_at(&triple.sample, j)).collect::<Result<_>>()?;
    let hits: Vec<f64> = points
        .par_iter()
        .map(|&x0| {
            let mut x = x0;
            let mut s = 0.0;
            for m in &maps {
                s += m.deriv(x).ln();
                x = m.eval(x);
            }
            if s / n as f64 <= alpha {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(mean_stderr(&hits))
}
