//! Grid functions on a fiber, Birkhoff cones and the projective metric.
//!
//! A [`GridFunction`] stores nodal values on a uniform grid and is evaluated
//! by linear interpolation, periodic on the circle and clamped on the
//! interval. The cone `Λ_a = {g > 0 : ‖Dg‖ ≤ a·inf g}` uses the largest
//! one-sided slope of the piecewise-linear interpolant as `‖Dg‖`, which is
//! exact for the stored representation.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::base::BaseSample;
use crate::error::{Error, Result};
use crate::fiber::{ModelSpec, Phase, PotentialSpec};

/// Boundary convention of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    Clamped,
}

/// Uniform grid on `[0,1)` (periodic) or `[0,1]` (clamped).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(n: usize, boundary: Boundary) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("grid size {n} below 3")));
        }
        Ok(Self { n, boundary })
    }

    pub fn for_phase(phase: Phase, n: usize) -> Result<Self> {
        Self::new(n, match phase {
            Phase::Circle => Boundary::Periodic,
            Phase::Interval => Boundary::Clamped,
        })
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => 1.0 / self.n as f64,
            Boundary::Clamped => 1.0 / (self.n - 1) as f64,
        }
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Quadrature weights of Lebesgue measure (rectangle rule on the circle,
    /// trapezoid on the interval). They sum to 1.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        match self.boundary {
            Boundary::Periodic => vec![h; self.n],
            Boundary::Clamped => {
                let mut w = vec![h; self.n];
                w[0] = 0.5 * h;
                w[self.n - 1] = 0.5 * h;
                w
            }
        }
    }

    /// Interpolation stencil `(i0, i1, t)`: value = (1-t)·g[i0] + t·g[i1].
    #[inline]
    pub fn stencil(&self, x: f64) -> (usize, usize, f64) {
        match self.boundary {
            Boundary::Periodic => {
                let u = x.rem_euclid(1.0) * self.n as f64;
                let f = u.floor();
                let i0 = (f as usize) % self.n;
                (i0, (i0 + 1) % self.n, (u - f).clamp(0.0, 1.0))
            }
            Boundary::Clamped => {
                let u = x.clamp(0.0, 1.0) * (self.n - 1) as f64;
                let i0 = (u.floor() as usize).min(self.n - 2);
                (i0, i0 + 1, (u - i0 as f64).clamp(0.0, 1.0))
            }
        }
    }

    /// Cell `[lo, hi)` represented by node `k` (clipped to `[0,1]` on the interval).
    pub fn cell(&self, k: usize) -> (f64, f64) {
        let h = self.spacing();
        let c = self.node(k);
        match self.boundary {
            Boundary::Periodic => (c - 0.5 * h, c + 0.5 * h),
            Boundary::Clamped => ((c - 0.5 * h).max(0.0), (c + 0.5 * h).min(1.0)),
        }
    }

    /// Mass that the cell-wise constant density with node masses `weights`
    /// assigns to the arc/interval `[a, b]` (on the circle `a` may be
    /// negative and `b` may exceed 1; lengths up to 1 are supported).
    pub fn interval_mass(&self, weights: &[f64], a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self.boundary {
            Boundary::Periodic => {
                if b - a >= 1.0 {
                    return weights.iter().sum();
                }
                let h = self.spacing();
                let mut acc = 0.0;
                // Cells are indexed by k with cell k = [(k - 1/2)h, (k + 1/2)h).
                let k_lo = ((a / h) + 0.5).floor() as i64;
                let k_hi = ((b / h) + 0.5).floor() as i64;
                for k in k_lo..=k_hi {
                    let lo = (k as f64 - 0.5) * h;
                    let hi = lo + h;
                    let overlap = (b.min(hi) - a.max(lo)).max(0.0);
                    if overlap > 0.0 {
                        acc += weights[k.rem_euclid(self.n as i64) as usize] * overlap / h;
                    }
                }
                acc
            }
            Boundary::Clamped => {
                let (a, b) = (a.max(0.0), b.min(1.0));
                let mut acc = 0.0;
                for (k, w) in weights.iter().enumerate() {
                    let (lo, hi) = self.cell(k);
                    let overlap = (b.min(hi) - a.max(lo)).max(0.0);
                    if overlap > 0.0 {
                        acc += w * overlap / (hi - lo);
                    }
                }
                acc
            }
        }
    }
}

/// Nodal values on a grid, evaluated by linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Domain(format!("{} values for a grid of {}", values.len(), grid.n)));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self { grid, values: (0..grid.n).map(|i| f(grid.node(i))).collect() }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.n] }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let (i0, i1, t) = self.grid.stencil(x);
        (1.0 - t) * self.values[i0] + t * self.values[i1]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Lebesgue integral with the grid quadrature.
    pub fn integral(&self) -> f64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect() }
    }
}

/// Largest one-sided slope of the piecewise-linear interpolant.
pub fn deriv_bound(g: &GridFunction) -> f64 {
    let n = g.values.len();
    let h = g.grid.spacing();
    let cells = match g.grid.boundary {
        Boundary::Periodic => n,
        Boundary::Clamped => n - 1,
    };
    (0..cells).map(|i| (g.values[(i + 1) % n] - g.values[i]).abs()).fold(0.0, f64::max) / h
}

/// Membership in `Λ_a`.
pub fn cone_member(g: &GridFunction, a: f64) -> bool {
    let m = g.min();
    m > 0.0 && deriv_bound(g) <= a * m
}

/// Membership in `Λ_a` with an absolute slack on the slope comparison.
pub fn cone_member_with_slack(g: &GridFunction, a: f64, slack: f64) -> bool {
    let m = g.min();
    m > 0.0 && deriv_bound(g) <= a * m + slack * m
}

/// Θ(g₁, g₂) = log(max(g₁/g₂)·max(g₂/g₁)).
pub fn projective_distance(g1: &GridFunction, g2: &GridFunction) -> Result<f64> {
    if g1.values.len() != g2.values.len() {
        return Err(Error::Domain("grid sizes differ".into()));
    }
    let mut up = f64::NEG_INFINITY;
    let mut down = f64::NEG_INFINITY;
    for (a, b) in g1.values.iter().zip(&g2.values) {
        if !(*a > 0.0 && *b > 0.0) {
            return Err(Error::Domain("projective distance needs strictly positive functions".into()));
        }
        let r = (a / b).ln();
        up = up.max(r);
        down = down.max(-r);
    }
    Ok((up + down).max(0.0))
}

/// Bisection steps used to locate the comparison constants of [`cone_distance`].
const CONE_BISECTION_STEPS: usize = 200;

/// `a·inf h − ‖Dh‖` for `h = u − r·v`; concave in `r`, and `h ∈ Λ_a ∪ {0}` iff it is `≥ 0`.
fn cone_slack(u: &GridFunction, v: &GridFunction, r: f64, a: f64) -> f64 {
    let h = u.combine(1.0, v, -r);
    a * h.min() - deriv_bound(&h)
}

/// Hilbert metric of `Λ_a`: `log(B/A)` with `A = sup{r : g₂ − r g₁ ∈ Λ_a}`
/// and `B = inf{r : r g₁ − g₂ ∈ Λ_a}`. Dominates [`projective_distance`].
pub fn cone_distance(g1: &GridFunction, g2: &GridFunction, a: f64) -> Result<f64> {
    if g1.values.len() != g2.values.len() {
        return Err(Error::Domain("grid sizes differ".into()));
    }
    if !(cone_member(g1, a) && cone_member(g2, a)) {
        return Err(Error::Domain(format!("cone distance needs both functions in the cone of aperture {a}")));
    }
    let ratios = g2.values.iter().zip(&g1.values).map(|(w, v)| w / v);
    let (r_min, r_max) = ratios.fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(r), hi.max(r)));

    let (mut lo, mut hi) = (0.0, r_min);
    for _ in 0..CONE_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if cone_slack(g2, g1, mid, a) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let big_a = lo;

    let neg = g2.scale(-1.0);
    let feasible = |r: f64| cone_slack(&neg, g1, -r, a) >= 0.0;
    let mut top = 2.0 * r_max;
    while !feasible(top) {
        top *= 2.0;
        if !top.is_finite() {
            return Ok(f64::INFINITY);
        }
    }
    let (mut lo, mut hi) = (r_max, top);
    for _ in 0..CONE_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let big_b = hi;
    if !(big_a > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok((big_b / big_a).ln().max(0.0))
}

/// α(ω) and β(ω) of the cone recursion.
pub fn cone_alpha_beta(model: &ModelSpec, potential: &PotentialSpec, sample: &BaseSample) -> (f64, f64) {
    alpha_beta_at(model, potential, sample.omega())
}

fn alpha_beta_at(model: &ModelSpec, potential: &PotentialSpec, w: crate::base::Omega) -> (f64, f64) {
    let bd = model.fiber(w).branch_data();
    let st = potential.at(w).stats();
    let e = st.oscillation().exp() * bd.combinatorial_rate();
    (e * (1.0 + st.deriv_norm), e * st.deriv_norm)
}

/// Cone apertures along `θ^j ω`, `j = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeParams {
    /// α(θ^j ω) for `j = 0..n`.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// κ(θ^j ω) for `j = 0..=n`.
    pub kappa: Vec<f64>,
    pub warmup: usize,
    /// |κ₀ from seed 10 − κ₀ from seed 1|.
    pub seed_gap: f64,
    /// Average of log α over the warm-up and window.
    pub mean_log_alpha: f64,
}

impl ConeParams {
    /// Largest |κ(θω) − α κ − β − 1| along the window.
    pub fn recursion_residual(&self) -> f64 {
        (0..self.alpha.len())
            .map(|j| (self.kappa[j + 1] - self.alpha[j] * self.kappa[j] - self.beta[j] - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Default agreement tolerance of the two warm-up seeds.
pub const KAPPA_SEED_TOL: f64 = 1e-8;

/// Iterate κ(θω) = α(ω)κ(ω) + β(ω) + 1 forward from `θ^{-warmup} ω`.
pub fn kappa_along_orbit(
    model: &ModelSpec,
    potential: &PotentialSpec,
    sample: &BaseSample,
    warmup: usize,
    n: usize,
) -> Result<ConeParams> {
    let start = -(warmup as i64);
    if !sample.covers(start, n as i64) {
        let (lo, hi) = sample.window();
        return Err(Error::OutOfWindow { k: if start < lo { start } else { n as i64 }, lo, hi });
    }
    let mut ab = Vec::with_capacity(warmup + n);
    for j in start..n as i64 {
        ab.push(alpha_beta_at(model, potential, sample.at(j)?));
    }
    let run = |seed: f64| {
        let mut k = vec![seed];
        for &(a, b) in &ab {
            let last = *k.last().unwrap();
            k.push(a * last + b + 1.0);
        }
        k
    };
    let k1 = run(1.0);
    let k10 = run(10.0);
    let seed_gap = (k10[warmup] - k1[warmup]).abs();
    let mean_log_alpha = ab.iter().map(|(a, _)| a.ln()).sum::<f64>() / ab.len().max(1) as f64;
    let rel = seed_gap / k1[warmup].abs().max(1.0);
    if !(rel <= KAPPA_SEED_TOL) {
        let suggested = if mean_log_alpha < 0.0 {
            let per_step = ab[..warmup].iter().map(|(a, _)| a.ln()).sum::<f64>() / warmup.max(1) as f64;
            let rate = if per_step < 0.0 { per_step } else { mean_log_alpha };
            (((KAPPA_SEED_TOL / 9.0).ln() / rate).ceil() as usize + 8).max(2 * warmup)
        } else {
            2 * warmup.max(1)
        };
        return Err(Error::WarmupInsufficient { warmup, gap: seed_gap, tol: KAPPA_SEED_TOL, suggested });
    }
    Ok(ConeParams {
        alpha: ab[warmup..].iter().map(|p| p.0).collect(),
        beta: ab[warmup..].iter().map(|p| p.1).collect(),
        kappa: k1[warmup..].to_vec(),
        warmup,
        seed_gap,
        mean_log_alpha,
    })
}

/// Upper bound 2log((1+λ)/(1−λ)) + 2log(1+λκ·diam) for the Θ-diameter of
/// the image cone.
pub fn cone_diameter_bound(lambda: f64, kappa: f64, diam: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("cone ratio {lambda} not in (0,1)")));
    }
    Ok(2.0 * ((1.0 + lambda) / (1.0 - lambda)).ln() + 2.0 * (1.0 + lambda * kappa * diam).ln())
}

/// Random element of `Λ_a`: a random trigonometric profile lifted by a
/// constant so that the cone condition holds, with a random margin (down to
/// nearly tight).
pub fn random_cone_element<R: Rng + ?Sized>(grid: Grid, a: f64, rng: &mut R) -> GridFunction {
    let modes = rng.random_range(1..=6usize);
    let coeffs: Vec<(f64, f64, f64)> = (0..modes)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0), rng.random_range(1.0..5.0_f64).floor()))
        .collect();
    let profile = |x: f64| -> f64 {
        coeffs.iter().map(|(c, ph, m)| c * (TAU * (m * x + ph)).sin()).sum::<f64>()
    };
    let raw = GridFunction::from_fn(grid, profile);
    let d = deriv_bound(&raw);
    let lo = raw.min();
    let margin = match rng.random_range(0..3u8) {
        0 => 1.0 + 1e-6,
        1 => 1.0 + rng.random_range(0.0..0.1),
        _ => 1.0 + rng.random_range(0.0..3.0),
    };
    let c = (d / a - lo).max(1e-3) * margin;
    let g = GridFunction { grid, values: raw.values.iter().map(|v| v + c).collect() };
    debug_assert!(cone_member(&g, a));
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn periodic(n: usize) -> Grid {
        Grid::new(n, Boundary::Periodic).unwrap()
    }

    #[test]
    fn deriv_bound_examples() {
        let g = periodic(2048);
        assert_eq!(deriv_bound(&GridFunction::constant(g, 3.0)), 0.0);
        let s = GridFunction::from_fn(g, |x| 1.0 + 0.5 * (TAU * x).sin());
        assert!((deriv_bound(&s) - PI).abs() / PI < 0.01);
        let c = Grid::new(101, Boundary::Clamped).unwrap();
        let ramp = GridFunction::from_fn(c, |x| 2.0 - 1.5 * x);
        assert!((deriv_bound(&ramp) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cone_membership_examples() {
        let g = periodic(2048);
        assert!(cone_member(&GridFunction::constant(g, 1.0), 0.01));
        let s = GridFunction::from_fn(g, |x| 1.0 + 0.5 * (TAU * x).sin());
        assert!(cone_member(&s, TAU + 0.1));
        assert!(!cone_member(&s, TAU - 0.5));
        let neg = GridFunction::from_fn(g, |x| x - 0.1);
        assert!(!cone_member(&neg, 1e6));
    }

    #[test]
    fn projective_distance_examples() {
        let g = periodic(2048);
        let s = GridFunction::from_fn(g, |x| 1.0 + 0.5 * (TAU * x).sin());
        assert_eq!(projective_distance(&s, &s).unwrap(), 0.0);
        assert!(projective_distance(&s, &s.scale(3.0)).unwrap() < 1e-14);
        let one = GridFunction::constant(g, 1.0);
        assert!((projective_distance(&one, &s).unwrap() - 3.0_f64.ln()).abs() < 1e-12);
        let z = GridFunction::constant(g, 0.0);
        assert!(projective_distance(&one, &z).is_err());
    }

    #[test]
    fn cone_distance_examples() {
        let g = periodic(2048);
        let one = GridFunction::constant(g, 1.0);
        assert!(cone_distance(&one, &one.scale(4.0), 1.0).unwrap() < 1e-12);
        let s = GridFunction::from_fn(g, |x| 1.0 + 0.1 * (TAU * x).sin());
        let a = 2.0;
        let d = cone_distance(&one, &s, a).unwrap();
        assert!(d >= projective_distance(&one, &s).unwrap());
        assert!((d - cone_distance(&s, &one, a).unwrap()).abs() < 1e-9);
        let c = 0.1 + TAU * 0.1 / a;
        assert!((d - ((1.0 + c) / (1.0 - c)).ln()).abs() < 1e-5, "{d}");
        assert!(cone_distance(&one, &s, a + 10.0).unwrap() < d);
        assert!(cone_distance(&one, &s, 0.1).is_err());
    }

    #[test]
    fn alpha_beta_examples() {
        let s = BaseSample::rotation_at(0.5, 0.2, 0, 0);
        let (a, b) = cone_alpha_beta(&ModelSpec::manneville_pomeau(0.5), &PotentialSpec::zero(), &s);
        assert!((a - 0.75).abs() < 1e-15 && b == 0.0);
        let (a, b) = cone_alpha_beta(&ModelSpec::doubling(), &PotentialSpec::zero(), &s);
        assert!((a - 0.5).abs() < 1e-15 && b == 0.0);
        let (a, b) = cone_alpha_beta(&ModelSpec::doubling(), &PotentialSpec::cosine(0.1, 1), &s);
        let e = 0.2_f64.exp() * 0.5;
        assert!((a - e * (1.0 + 0.2 * PI)).abs() < 1e-14);
        assert!((b - e * 0.2 * PI).abs() < 1e-14);
    }

    #[test]
    fn kappa_fixed_points() {
        let s = BaseSample::rotation_at(0.5, 0.2, -200, 10);
        let mp = kappa_along_orbit(&ModelSpec::manneville_pomeau(0.5), &PotentialSpec::zero(), &s, 200, 10).unwrap();
        assert!(mp.kappa.iter().all(|k| (k - 4.0).abs() < 1e-9));
        let d = kappa_along_orbit(&ModelSpec::doubling(), &PotentialSpec::zero(), &s, 100, 10).unwrap();
        assert!(d.kappa.iter().all(|k| (k - 2.0).abs() < 1e-12));
        assert!(d.recursion_residual() < 1e-14);
    }

    #[test]
    fn kappa_short_warmup_is_reported() {
        let s = BaseSample::rotation_at(0.5, 0.2, -10, 10);
        let err = kappa_along_orbit(&ModelSpec::manneville_pomeau(0.5), &PotentialSpec::zero(), &s, 10, 5).unwrap_err();
        match err {
            Error::WarmupInsufficient { suggested, .. } => assert!(suggested > 60),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn diameter_bound_examples() {
        assert!(cone_diameter_bound(1e-12, 4.0, 1.0).unwrap() < 1e-10);
        assert!((cone_diameter_bound(0.5, 4.0, 1.0).unwrap() - 4.0 * 3.0_f64.ln()).abs() < 1e-14);
        assert!(cone_diameter_bound(0.5, 5.0, 1.0).unwrap() > cone_diameter_bound(0.5, 4.0, 1.0).unwrap());
        assert!(cone_diameter_bound(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn interval_mass_of_uniform_weights() {
        let g = periodic(100);
        let w = g.weights();
        assert!((g.interval_mass(&w, 0.1, 0.35) - 0.25).abs() < 1e-12);
        assert!((g.interval_mass(&w, -0.05, 0.05) - 0.1).abs() < 1e-12);
        let c = Grid::new(101, Boundary::Clamped).unwrap();
        let wc = c.weights();
        assert!((c.interval_mass(&wc, 0.0, 0.5) - 0.5).abs() < 1e-12);
    }
}
