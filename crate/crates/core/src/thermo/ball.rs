//! Dynamic balls `B_ω(x, n, ε)` as offsets around the centre.

use serde::Serialize;

use crate::base::BaseSample;
use crate::fiber::{FiberMap, ModelSpec, Phase};
use crate::{Error, Result};

/// The connected component of `{y : d(f^j y, f^j x) < ε}` containing `x`,
/// stored as offsets `[x - left, x + right]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicBall {
    pub center: f64,
    /// Number of constrained times `j = 0..constraints`.
    pub constraints: usize,
    pub eps: f64,
    pub left: f64,
    pub right: f64,
    /// Offsets of the image of the ball at the last constrained time.
    pub image_left: f64,
    pub image_right: f64,
    /// Set when an interval branch boundary trimmed the ball.
    pub clipped: bool,
}

impl DynamicBall {
    pub fn lower(&self) -> f64 {
        self.center - self.left
    }

    pub fn upper(&self) -> f64 {
        self.center + self.right
    }

    pub fn length(&self) -> f64 {
        self.left + self.right
    }

    /// Whether `other` lies inside `self` up to `tol`.
    pub fn contains(&self, other: &DynamicBall, tol: f64) -> bool {
        other.lower() >= self.lower() - tol && other.upper() <= self.upper() + tol
    }
}

/// `B_ω(x, n, ε)` with constraints at the times `0 ≤ j ≤ n`.
pub fn dynamic_ball(model: &ModelSpec, sample: &BaseSample, x: f64, n: usize, eps: f64) -> Result<DynamicBall> {
    ball_with_constraints(model, sample, x, n + 1, eps)
}

/// Dynamic ball constrained at `count` consecutive times `0 ≤ j < count`.
pub fn ball_with_constraints(
    model: &ModelSpec,
    sample: &BaseSample,
    x: f64,
    count: usize,
    eps: f64,
) -> Result<DynamicBall> {
    if count == 0 {
        return Err(Error::Precondition("a dynamic ball needs at least one constrained time".into()));
    }
    let maps: Vec<FiberMap> = (0..count as i64 - 1).map(|j| model.fiber_at(sample, j)).collect::<Result<_>>()?;
    ball_along(&maps, model.phase(), x, eps)
}

pub(crate) fn ball_along(maps: &[FiberMap], phase: Phase, x: f64, eps: f64) -> Result<DynamicBall> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("ball radius must lie in (0, 1/2), got {eps}")));
    }
    let mut orbit = Vec::with_capacity(maps.len() + 1);
    let mut cur = x;
    orbit.push(cur);
    for m in maps {
        cur = m.eval(cur);
        orbit.push(cur);
    }
    let last = *orbit.last().expect("orbit is never empty");
    let (mut l, mut r) = (eps, eps);
    let mut clipped = false;
    if phase == Phase::Interval {
        if last < eps || 1.0 - last < eps {
            clipped = true;
        }
        l = l.min(last);
        r = r.min(1.0 - last);
    }
    for (j, m) in maps.iter().enumerate().rev() {
        let xj = orbit[j];
        let lo = m.lift_solve(xj, -l)?;
        let hi = m.lift_solve(xj, r)?;
        clipped |= lo.clipped || hi.clipped;
        l = (-lo.t).min(eps);
        r = hi.t.min(eps);
    }
    let (mut il, mut ir) = (l, r);
    for (j, m) in maps.iter().enumerate() {
        il = -m.lift_delta(orbit[j], -il);
        ir = m.lift_delta(orbit[j], ir);
    }
    Ok(DynamicBall { center: x, constraints: maps.len() + 1, eps, left: l, right: r, image_left: il, image_right: ir, clipped })
}
