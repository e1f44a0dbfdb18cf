//! Concrete one-dimensional fiber maps.
//!
//! Circle maps are full-branch maps of degree `k`: branch `i` covers
//! `[i/k, (i+1)/k)` and, in the local coordinate `t = k x - i`, equals
//! `G_i(t) mod 1` with `G_i(t) = t` (linear branch) or
//! `G_i(t) = t/k + (1 - 1/k) t^{1+β}` (intermittent branch, neutral at
//! `t = 0`). An optional offset γ conjugates the map by a rotation,
//! `x ↦ T(x - γ) + γ`. For `k = 2` with one intermittent branch this is the
//! Manneville–Pomeau map `x(1 + (2x)^β)` on the left half and `2x - 1` on the
//! right half.
//!
//! Interval maps live on `[0,1]`: the Manneville–Pomeau map `f₀` and the
//! convex map `f₁(x) = x/L + (1 - 1/L)x²` with an attracting fixed point at 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-13;
const MAX_ITER: usize = 200;

/// Phase space of a fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Circle,
    Interval,
}

/// One preimage of a point together with the inverse derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preimage {
    pub y: f64,
    pub inv_deriv: f64,
    pub branch: usize,
}

/// The (H1) constants of one fiber map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchData {
    pub deg: usize,
    pub p: usize,
    pub q: usize,
    /// Expansion constant of the `p` uniformly expanding branches; absent when `p = 0`.
    pub sigma: Option<f64>,
    pub l: f64,
}

impl BranchData {
    /// σ⁻¹p + Lq.
    pub fn combinatorial_sum(&self) -> f64 {
        let expanding = match self.sigma {
            Some(s) => self.p as f64 / s,
            None => 0.0,
        };
        expanding + self.l * self.q as f64
    }

    /// (σ⁻¹p + Lq)/deg.
    pub fn combinatorial_rate(&self) -> f64 {
        self.combinatorial_sum() / self.deg as f64
    }
}

/// Result of inverting a local branch lift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalInverse {
    pub t: f64,
    /// The requested image offset left the branch image and was clipped.
    pub clipped: bool,
}

/// A single fiber map `f_ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberMap {
    /// Full-branch circle map of degree `k` whose first `ell` branches are intermittent.
    Circle { k: usize, ell: usize, beta: f64, shift: f64 },
    /// Manneville–Pomeau map on `[0,1]`.
    IntervalMp { beta: f64 },
    /// Convex map `x/L + (1-1/L)x²` on `[0,1]`.
    IntervalConvex { l: f64 },
}

/// `(t0 + d)^e - t0^e` without cancellation for `t0 ≥ 0`, `t0 + d ≥ 0`.
fn pow_diff(t0: f64, d: f64, e: f64) -> f64 {
    if t0 <= 0.0 {
        return d.max(0.0).powf(e);
    }
    t0.powf(e) * (e * (d / t0).ln_1p()).exp_m1()
}

/// Intermittent branch profile with weight `w`: `w t + (1-w) t^{1+β}`.
fn g_int(w: f64, beta: f64, t: f64) -> f64 {
    w * t + (1.0 - w) * t.powf(1.0 + beta)
}

fn g_int_prime(w: f64, beta: f64, t: f64) -> f64 {
    w + (1.0 - w) * (1.0 + beta) * t.max(0.0).powf(beta)
}

/// Solve `w t + (1-w) t^{1+β} = v` for `t ∈ [0,1]`.
///
/// The profile is convex and increasing, so Newton started to the right of
/// the root decreases monotonically; a bisection step is taken whenever the
/// Newton iterate leaves the current bracket.
fn solve_int(w: f64, beta: f64, v: f64, branch: usize) -> Result<f64> {
    if v <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut t = if v >= 1.0 { 1.0 } else { v.min(1.0) };
    if g_int(w, beta, t) - v < 0.0 {
        t = 1.0;
    }
    for _ in 0..MAX_ITER {
        let r = g_int(w, beta, t) - v;
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let mut next = t - r / g_int_prime(w, beta, t);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= NEWTON_TOL * t.max(1e-300) || hi - lo <= f64::EPSILON * hi {
            return Ok(next);
        }
        t = next;
    }
    Err(Error::BranchInversion { branch, target: v })
}

/// Circle branch difference `G_i(t0 + d) - G_i(t0)` in local coordinates.
fn circle_branch_delta(k: usize, intermittent: bool, beta: f64, t0: f64, d: f64) -> f64 {
    if !intermittent {
        return d;
    }
    let w = 1.0 / k as f64;
    w * d + (1.0 - w) * pow_diff(t0, d, 1.0 + beta)
}

fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl FiberMap {
    pub fn phase(&self) -> Phase {
        match self {
            FiberMap::Circle { .. } => Phase::Circle,
            _ => Phase::Interval,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            FiberMap::Circle { k, .. } => *k,
            FiberMap::IntervalMp { .. } => 2,
            FiberMap::IntervalConvex { .. } => 1,
        }
    }

    pub fn branch_data(&self) -> BranchData {
        match *self {
            FiberMap::Circle { k, ell, .. } => BranchData {
                deg: k,
                p: k - ell,
                q: ell,
                sigma: if ell < k { Some(k as f64) } else { None },
                l: if ell > 0 { 1.0 } else { 1.0 / k as f64 },
            },
            FiberMap::IntervalMp { .. } => BranchData { deg: 2, p: 1, q: 1, sigma: Some(2.0), l: 1.0 },
            FiberMap::IntervalConvex { l } => BranchData { deg: 1, p: 0, q: 1, sigma: None, l },
        }
    }

    /// Circle coordinates: (cell index, local coordinate) of `u = x - γ`.
    fn circle_cell(k: usize, shift: f64, x: f64) -> (usize, f64) {
        let u = wrap(x - shift);
        let ku = u * k as f64;
        let i = (ku.floor() as usize).min(k - 1);
        (i, (ku - i as f64).clamp(0.0, 1.0))
    }

    /// Index of the injectivity domain containing `x`.
    pub fn branch_of(&self, x: f64) -> usize {
        match *self {
            FiberMap::Circle { k, shift, .. } => Self::circle_cell(k, shift, x).0,
            FiberMap::IntervalMp { .. } => usize::from(x >= 0.5),
            FiberMap::IntervalConvex { .. } => 0,
        }
    }

    /// Forward evaluation `f_ω(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            FiberMap::Circle { k, ell, beta, shift } => {
                let (i, t) = Self::circle_cell(k, shift, x);
                let g = if i < ell { g_int(1.0 / k as f64, beta, t) } else { t };
                wrap(g + shift)
            }
            FiberMap::IntervalMp { beta } => {
                if x < 0.5 {
                    x * (1.0 + (2.0 * x).powf(beta))
                } else {
                    2.0 * x - 1.0
                }
            }
            FiberMap::IntervalConvex { l } => x / l + (1.0 - 1.0 / l) * x * x,
        }
    }

    /// Evaluation of branch `branch` extended to the closure of its domain.
    pub fn eval_branch(&self, x: f64, branch: usize) -> f64 {
        match *self {
            FiberMap::IntervalMp { beta } if branch == 0 => x * (1.0 + (2.0 * x).powf(beta)),
            _ => self.eval(x),
        }
    }

    /// Absolute derivative `|f_ω'(x)|`.
    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            FiberMap::Circle { k, ell, beta, shift } => {
                let (i, t) = Self::circle_cell(k, shift, x);
                if i < ell {
                    k as f64 * g_int_prime(1.0 / k as f64, beta, t)
                } else {
                    k as f64
                }
            }
            FiberMap::IntervalMp { beta } => {
                if x < 0.5 {
                    1.0 + (1.0 + beta) * (2.0 * x).powf(beta)
                } else {
                    2.0
                }
            }
            FiberMap::IntervalConvex { l } => 1.0 / l + 2.0 * (1.0 - 1.0 / l) * x,
        }
    }

    /// Largest value of `|f'|` on the fiber.
    pub fn max_deriv(&self) -> f64 {
        match *self {
            FiberMap::Circle { k, ell, beta, .. } => {
                if ell > 0 {
                    1.0 + (k as f64 - 1.0) * (1.0 + beta)
                } else {
                    k as f64
                }
            }
            FiberMap::IntervalMp { beta } => 2.0 + beta,
            FiberMap::IntervalConvex { l } => 2.0 - 1.0 / l,
        }
    }

    /// Smallest value of `|f'|` on the fiber.
    pub fn min_deriv(&self) -> f64 {
        match *self {
            FiberMap::Circle { k, ell, .. } => {
                if ell > 0 {
                    1.0
                } else {
                    k as f64
                }
            }
            FiberMap::IntervalMp { .. } => 1.0,
            FiberMap::IntervalConvex { l } => 1.0 / l,
        }
    }

    /// All preimages of `x` with inverse derivatives, one per branch.
    pub fn preimages_into(&self, x: f64, out: &mut Vec<Preimage>) -> Result<()> {
        out.clear();
        match *self {
            FiberMap::Circle { k, ell, beta, shift } => {
                let target = wrap(x - shift);
                let kf = k as f64;
                for i in 0..k {
                    let (t, d) = if i < ell {
                        let w = 1.0 / kf;
                        let t = solve_int(w, beta, target, i)?;
                        (t, kf * g_int_prime(w, beta, t))
                    } else {
                        (target, kf)
                    };
                    let y = wrap((i as f64 + t) / kf + shift);
                    out.push(Preimage { y, inv_deriv: 1.0 / d, branch: i });
                }
            }
            FiberMap::IntervalMp { beta } => {
                let t = solve_int(0.5, beta, x, 0)?;
                let y = 0.5 * t;
                let d = 1.0 + (1.0 + beta) * t.powf(beta);
                out.push(Preimage { y, inv_deriv: 1.0 / d, branch: 0 });
                let y = 0.5 * (x + 1.0);
                out.push(Preimage { y, inv_deriv: 0.5, branch: 1 });
            }
            FiberMap::IntervalConvex { l } => {
                let a = 1.0 - 1.0 / l;
                let b = 1.0 / l;
                let y = 2.0 * x / (b + (b * b + 4.0 * a * x).sqrt());
                out.push(Preimage { y, inv_deriv: 1.0 / self.deriv(y), branch: 0 });
            }
        }
        Ok(())
    }

    pub fn preimages(&self, x: f64) -> Result<Vec<Preimage>> {
        let mut out = Vec::with_capacity(self.degree());
        self.preimages_into(x, &mut out)?;
        Ok(out)
    }

    /// Domain of the branch containing `x`, as offsets `(lo, hi)` from `x`
    /// (`lo ≤ 0 ≤ hi`). Circle lifts are unbounded.
    fn branch_domain(&self, x: f64) -> (f64, f64) {
        match *self {
            FiberMap::Circle { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            FiberMap::IntervalMp { .. } => {
                if x < 0.5 {
                    (-x, 0.5 - x)
                } else {
                    (0.5 - x, 1.0 - x)
                }
            }
            FiberMap::IntervalConvex { .. } => (-x, 1.0 - x),
        }
    }

    /// Increment `F(x + t) - F(x)` of the continuous lift of the branch
    /// containing `x`, computed without cancellation for small `t`.
    pub fn lift_delta(&self, x: f64, t: f64) -> f64 {
        match *self {
            FiberMap::Circle { k, ell, beta, shift } => {
                let (mut i, mut p) = Self::circle_cell(k, shift, x);
                let mut r = t * k as f64;
                let mut acc = 0.0;
                if r >= 0.0 {
                    while p + r > 1.0 {
                        acc += circle_branch_delta(k, i < ell, beta, p, 1.0 - p);
                        r -= 1.0 - p;
                        i = (i + 1) % k;
                        p = 0.0;
                    }
                } else {
                    while p + r < 0.0 {
                        acc -= circle_branch_delta(k, i < ell, beta, 0.0, p);
                        r += p;
                        i = (i + k - 1) % k;
                        p = 1.0;
                    }
                }
                acc + circle_branch_delta(k, i < ell, beta, p, r)
            }
            FiberMap::IntervalMp { beta } => {
                if x < 0.5 {
                    let t0 = 2.0 * x;
                    0.5 * 2.0 * t + 0.5 * pow_diff(t0, 2.0 * t, 1.0 + beta)
                } else {
                    2.0 * t
                }
            }
            FiberMap::IntervalConvex { l } => t * (1.0 / l + (1.0 - 1.0 / l) * (2.0 * x + t)),
        }
    }

    /// Offset `t` with `F(x + t) - F(x) = s` along the branch containing `x`.
    ///
    /// On interval maps the answer is clipped to the branch domain.
    pub fn lift_solve(&self, x: f64, s: f64) -> Result<LocalInverse> {
        if s == 0.0 {
            return Ok(LocalInverse { t: 0.0, clipped: false });
        }
        let (dom_lo, dom_hi) = self.branch_domain(x);
        let edge = if s > 0.0 { dom_hi } else { dom_lo };
        if edge.is_finite() {
            let reach = self.lift_delta(x, edge);
            if (s > 0.0 && s >= reach) || (s < 0.0 && s <= reach) {
                return Ok(LocalInverse { t: edge, clipped: true });
            }
        }
        let (dmin, dmax) = (self.min_deriv(), self.max_deriv());
        let (mut lo, mut hi) = if s > 0.0 { (s / dmax, s / dmin) } else { (s / dmin, s / dmax) };
        if edge.is_finite() {
            if s > 0.0 {
                hi = hi.min(edge);
            } else {
                lo = lo.max(edge);
            }
        }
        let mut t = (s / self.deriv(self.wrap_point(x))).clamp(lo, hi);
        for _ in 0..MAX_ITER {
            let r = self.lift_delta(x, t) - s;
            if r == 0.0 {
                return Ok(LocalInverse { t, clipped: false });
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.deriv(self.wrap_point(x + t));
            let mut next = t - r / d;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * next.abs() || (hi - lo).abs() <= 2.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
                return Ok(LocalInverse { t: next, clipped: false });
            }
            t = next;
        }
        Err(Error::BranchInversion { branch: self.branch_of(x), target: s })
    }

    fn wrap_point(&self, x: f64) -> f64 {
        match self.phase() {
            Phase::Circle => wrap(x),
            Phase::Interval => x.clamp(0.0, 1.0),
        }
    }
}

/// Signed circle displacement from `a` to `b` in `[-1/2, 1/2)`.
pub fn circle_delta(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(1.0);
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Distance on the fiber phase space.
pub fn phase_distance(phase: Phase, a: f64, b: f64) -> f64 {
    match phase {
        Phase::Circle => circle_delta(a, b).abs(),
        Phase::Interval => (a - b).abs(),
    }
}
