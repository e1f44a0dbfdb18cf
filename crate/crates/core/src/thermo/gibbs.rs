//! Weak Gibbs ratios of ν at hyperbolic times.
//!
//! The ν₀-mass of a dynamic ball is transported to fiber `n`, where the
//! image of the ball is an ε-ball resolved by many grid cells:
//! `ν₀(B) = (λ₀⋯λ_{n-1})⁻¹ ∫_{fⁿB} e^{S_nφ(g z)} dν_n(z)` with `g` the inverse
//! branch of `fⁿ` on the ball.

use rayon::prelude::*;
use serde::Serialize;

use super::ball::ball_along;
use crate::fiber::{FiberMap, FiberPotential, ModelSpec, PotentialSpec};
use crate::hyperbolic::{expansion_sequence, hyperbolic_times};
use crate::space::Boundary;
use crate::transfer::EigenTriple;
use crate::{Error, Result};

/// Offsets below this size contribute nothing representable to `S_nφ`.
const NEGLIGIBLE_OFFSET: f64 = 1e-14;

/// One weak Gibbs ratio at a hyperbolic time `n_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GibbsPoint {
    pub n_k: usize,
    pub log_nu_ball: f64,
    pub log_gibbs_sum: f64,
    /// `log_nu_ball − log_gibbs_sum`.
    pub d: f64,
}

/// Ratios at every detected hyperbolic time of one orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsReport {
    pub x: f64,
    pub gamma: f64,
    pub eps: f64,
    pub times: Vec<usize>,
    pub points: Vec<GibbsPoint>,
}

impl GibbsReport {
    /// `|d_k| / n_k` at the largest detected time.
    pub fn final_rate(&self) -> Option<f64> {
        self.points.last().filter(|p| p.n_k > 0).map(|p| p.d.abs() / p.n_k as f64)
    }

    pub fn largest_time(&self) -> Option<usize> {
        self.times.last().copied()
    }
}

struct Orbit {
    maps: Vec<FiberMap>,
    pots: Vec<FiberPotential>,
    x: Vec<f64>,
}

fn orbit(triple: &EigenTriple, model: &ModelSpec, potential: &PotentialSpec, x0: f64, n: usize) -> Result<Orbit> {
    let s = &triple.sample;
    let mut maps = Vec::with_capacity(n);
    let mut pots = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n + 1);
    let mut cur = x0;
    x.push(cur);
    for j in 0..n as i64 {
        let w = s.at(j)?;
        let m = model.fiber(w);
        cur = m.eval(cur);
        maps.push(m);
        pots.push(potential.at(w));
        x.push(cur);
    }
    Ok(Orbit { maps, pots, x })
}

fn gibbs_point(triple: &EigenTriple, model: &ModelSpec, orb: &Orbit, n: usize, eps: f64) -> Result<GibbsPoint> {
    let ball = ball_along(&orb.maps[..n], model.phase(), orb.x[0], eps)?;
    let xn = orb.x[n];
    let (a, b) = (xn - ball.image_left, xn + ball.image_right);
    let grid = &triple.grid;
    let h = grid.spacing();
    let nu = &triple.nu[n];

    let cells: Vec<(usize, f64, f64)> = match grid.boundary {
        Boundary::Periodic => {
            let k_lo = ((a / h) + 0.5).floor() as i64;
            let k_hi = ((b / h) + 0.5).floor() as i64;
            (k_lo..=k_hi)
                .filter_map(|k| {
                    let lo = (k as f64 - 0.5) * h;
                    let (s, e) = (a.max(lo), b.min(lo + h));
                    (e > s).then(|| (k.rem_euclid(grid.n as i64) as usize, (e - s) / h, 0.5 * (s + e)))
                })
                .collect()
        }
        Boundary::Clamped => (0..grid.n)
            .filter_map(|k| {
                let (lo, hi) = grid.cell(k);
                let (s, e) = (a.max(lo), b.min(hi));
                (e > s).then(|| (k, (e - s) / (hi - lo), 0.5 * (s + e)))
            })
            .collect(),
    };

    let mut integral = 0.0;
    for (k, frac, z) in cells {
        if nu[k] == 0.0 {
            continue;
        }
        let mut s = z - xn;
        let mut acc = 0.0;
        for j in (0..n).rev() {
            if s.abs() < NEGLIGIBLE_OFFSET {
                break;
            }
            let t = orb.maps[j].lift_solve(orb.x[j], s)?.t;
            acc += orb.pots[j].delta(orb.x[j], t);
            s = t;
        }
        integral += nu[k] * frac * acc.exp();
    }
    if !(integral > 0.0) {
        return Err(Error::NonFinite(format!("ν_n-mass of the image ball at n = {n} is {integral}")));
    }
    let sn_phi: f64 = (0..n).map(|j| orb.pots[j].eval(orb.x[j])).sum();
    let log_gibbs_sum = sn_phi - triple.log_lambda_sum(n);
    let d = integral.ln();
    Ok(GibbsPoint { n_k: n, log_nu_ball: log_gibbs_sum + d, log_gibbs_sum, d })
}

fn check_window(triple: &EigenTriple, n: usize) -> Result<()> {
    if n > triple.window {
        return Err(Error::OutOfWindow { k: n as i64, lo: 0, hi: triple.window as i64 });
    }
    Ok(())
}

/// Weak Gibbs ratio at a γ-hyperbolic time `n` of `(ω, x)`.
///
/// `n = 0` is accepted and gives the plain ε-ball.
pub fn weak_gibbs_ratio(
    triple: &EigenTriple,
    model: &ModelSpec,
    potential: &PotentialSpec,
    x: f64,
    n: usize,
    eps: f64,
    gamma: f64,
) -> Result<GibbsPoint> {
    check_window(triple, n)?;
    if n > 0 {
        let record = expansion_sequence(model, &triple.sample, x, n)?;
        if !hyperbolic_times(&record, gamma).contains(&n) {
            return Err(Error::Precondition(format!("n = {n} is not a {gamma}-hyperbolic time of x = {x}")));
        }
    }
    let orb = orbit(triple, model, potential, x, n)?;
    gibbs_point(triple, model, &orb, n, eps)
}

/// Ratios at all γ-hyperbolic times up to the triple's window.
pub fn gibbs_report(
    triple: &EigenTriple,
    model: &ModelSpec,
    potential: &PotentialSpec,
    x: f64,
    gamma: f64,
    eps: f64,
) -> Result<GibbsReport> {
    let n = triple.window;
    let record = expansion_sequence(model, &triple.sample, x, n)?;
    let times = hyperbolic_times(&record, gamma);
    let orb = orbit(triple, model, potential, x, n)?;
    let points =
        times.par_iter().map(|&t| gibbs_point(triple, model, &orb, t, eps)).collect::<Result<Vec<_>>>()?;
    Ok(GibbsReport { x, gamma, eps, times, points })
}

/// `log ν₀(B_ω(x, n, ε))` by direct quadrature of the fiber-0 weights;
/// accurate only while the ball spans many grid cells.
pub fn log_ball_mass_direct(triple: &EigenTriple, model: &ModelSpec, x: f64, n: usize, eps: f64) -> Result<f64> {
    check_window(triple, n)?;
    let ball = super::ball::dynamic_ball(model, &triple.sample, x, n, eps)?;
    Ok(triple.grid.interval_mass(&triple.nu[0], ball.lower(), ball.upper()).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseSample;
    use crate::transfer::{solve_triple, TripleParams};

    fn triple(model: &ModelSpec, pot: &PotentialSpec, n: usize, nb: usize, grid: usize) -> EigenTriple {
        let s = BaseSample::rotation_at(0.3819660112501051, 0.2, -(nb as i64), (n + nb) as i64);
        solve_triple(model, pot, &s, TripleParams::new(n, nb, grid)).unwrap()
    }

    #[test]
    fn doubling_zero_potential_gives_log_two_eps() {
        let m = ModelSpec::doubling();
        let p = PotentialSpec::zero();
        let t = triple(&m, &p, 40, 4, 1024);
        for &n in &[1usize, 5, 20, 40] {
            let g = weak_gibbs_ratio(&t, &m, &p, 0.123, n, 0.02, 0.5).unwrap();
            assert!((g.d - (0.04f64).ln()).abs() < 1e-9, "n={n}: {}", g.d);
            assert!((g.log_gibbs_sum + n as f64 * 2f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn transport_agrees_with_direct_quadrature() {
        let m = ModelSpec::manneville_pomeau(0.5);
        let p = PotentialSpec::cosine(0.05, 1);
        let t = triple(&m, &p, 4, 96, 4096);
        let x = 0.7;
        let record = expansion_sequence(&m, &t.sample, x, 4).unwrap();
        for n in hyperbolic_times(&record, 0.1).into_iter().filter(|&n| n <= 2) {
            let g = weak_gibbs_ratio(&t, &m, &p, x, n, 0.05, 0.1).unwrap();
            let direct = log_ball_mass_direct(&t, &m, x, n, 0.05).unwrap();
            assert!((g.log_nu_ball - direct).abs() < 5e-3, "n={n}: {} vs {direct}", g.log_nu_ball);
        }
        let g = weak_gibbs_ratio(&t, &m, &p, x, 0, 0.05, 0.1).unwrap();
        let direct = log_ball_mass_direct(&t, &m, x, 0, 0.05).unwrap();
        assert!((g.log_nu_ball - direct).abs() < 1e-12);
    }

    #[test]
    fn non_hyperbolic_time_is_rejected() {
        let m = ModelSpec::manneville_pomeau(0.5);
        let p = PotentialSpec::zero();
        let t = triple(&m, &p, 8, 96, 512);
        // Orbit of 1e-4 lingers at the neutral fixed point.
        let err = weak_gibbs_ratio(&t, &m, &p, 1e-4, 1, 0.02, 0.5).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn report_covers_detected_times() {
        let m = ModelSpec::manneville_pomeau(0.5);
        let p = PotentialSpec::cosine(0.05, 1);
        let t = triple(&m, &p, 64, 96, 1024);
        let r = gibbs_report(&t, &m, &p, 0.61, 0.1, 0.02).unwrap();
        assert_eq!(r.times.len(), r.points.len());
        assert!(r.points.iter().all(|q| q.d.is_finite()));
    }
}
