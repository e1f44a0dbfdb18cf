//! Quenched correlations through the normalized operator and their decay rate.

use statrs::distribution::{ContinuousCDF, StudentsT};
use serde::Serialize;

use crate::fiber::{ModelSpec, PotentialSpec};
use crate::transfer::{EigenTriple, FiberOperator, Observable};
use crate::{Error, Result};

/// Values at or below this level are excluded from rate fits.
pub const CORRELATION_FLOOR: f64 = 1e-13;

/// Smallest number of points accepted by [`fit_decay_rate`].
pub const MIN_FIT_POINTS: usize = 5;

/// `C(n)` for `n = 1..=n_max`, where
/// `C(n) = |∫ u · (𝓛ⁿ(v h₀) / (λⁿ h_n)) dμ_n − ∫u dμ_n ∫v dμ₀|`
/// with `u = left` on fiber `n` and `v = right` on fiber 0.
pub fn correlation_series(
    triple: &EigenTriple,
    model: &ModelSpec,
    potential: &PotentialSpec,
    left: &dyn Observable,
    right: &dyn Observable,
    n_max: usize,
) -> Result<Vec<f64>> {
    if n_max > triple.window {
        return Err(Error::OutOfWindow { k: n_max as i64, lo: 0, hi: triple.window as i64 });
    }
    let grid = triple.grid;
    let nodes = grid.nodes();
    let mean_right: f64 = triple.mu[0].iter().zip(&nodes).map(|(m, &x)| m * right.value(x)).sum();
    let left_vals: Vec<f64> = nodes.iter().map(|&x| left.value(x)).collect();
    let mut g: Vec<f64> = nodes.iter().zip(&triple.h[0].values).map(|(&x, h)| right.value(x) * h).collect();
    let mut out = Vec::with_capacity(n_max);
    for j in 0..n_max {
        let op = FiberOperator::at(model, potential, &triple.sample, j as i64, grid)?;
        let lam = triple.lambda[j];
        g = op.apply(&g).into_iter().map(|v| v / lam).collect();
        let nu = &triple.nu[j + 1];
        let mu = &triple.mu[j + 1];
        let joint: f64 = nu.iter().zip(&left_vals).zip(&g).map(|((w, u), gv)| w * u * gv).sum();
        let mean_left: f64 = mu.iter().zip(&left_vals).map(|(w, u)| w * u).sum();
        out.push((joint - mean_left * mean_right).abs());
    }
    Ok(out)
}

/// `C(n)` at a single lag.
pub fn correlation(
    triple: &EigenTriple,
    model: &ModelSpec,
    potential: &PotentialSpec,
    left: &dyn Observable,
    right: &dyn Observable,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("correlation lag must be at least 1".into()));
    }
    Ok(correlation_series(triple, model, potential, left, right, n)?[n - 1])
}

/// `|∫ (u∘fⁿ) v dμ₀ − ∫u dμ_n ∫v dμ₀|` by quadrature against the μ₀ weights.
pub fn correlation_direct(
    triple: &EigenTriple,
    model: &ModelSpec,
    left: &dyn Observable,
    right: &dyn Observable,
    n: usize,
) -> Result<f64> {
    if n > triple.window {
        return Err(Error::OutOfWindow { k: n as i64, lo: 0, hi: triple.window as i64 });
    }
    let maps: Vec<_> = (0..n as i64).map(|j| model.fiber_at(&triple.sample, j)).collect::<Result<_>>()?;
    let nodes = triple.grid.nodes();
    let mut joint = 0.0;
    let mut mean_right = 0.0;
    for (&x0, &m) in nodes.iter().zip(&triple.mu[0]) {
        let v = right.value(x0);
        let xn = maps.iter().fold(x0, |x, f| f.eval(x));
        joint += m * left.value(xn) * v;
        mean_right += m * v;
    }
    let mean_left: f64 = triple.mu[n].iter().zip(&nodes).map(|(m, &x)| m * left.value(x)).sum();
    Ok((joint - mean_left * mean_right).abs())
}

/// Least-squares fit of `log C(n) ≈ c + n log τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub tau: f64,
    /// Upper end of the two-sided 95% Student-t interval for τ.
    pub tau_upper: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub points: usize,
}

/// Fit the exponential decay rate of `values[i] = C(i + 1)`, ignoring
/// entries at or below [`CORRELATION_FLOOR`].
pub fn fit_decay_rate(values: &[f64]) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, &c)| c.is_finite() && c > CORRELATION_FLOOR)
        .map(|(i, &c)| ((i + 1) as f64, c.ln()))
        .collect();
    let m = pts.len();
    if m < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{m} correlation values above {CORRELATION_FLOOR:e}; at least {MIN_FIT_POINTS} are needed"
        )));
    }
    let mf = m as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let df = mf - 2.0;
    let slope_stderr = (rss / df / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InsufficientData(e.to_string()))?.inverse_cdf(0.975);
    Ok(DecayFit { tau: slope.exp(), tau_upper: (slope + t * slope_stderr).exp(), slope, slope_stderr, points: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseSample;
    use crate::transfer::{solve_triple, TripleParams};
    use std::f64::consts::TAU;

    fn cos(x: f64) -> f64 {
        (TAU * x).cos()
    }

    fn triple(model: &ModelSpec, pot: &PotentialSpec, n: usize, nb: usize, grid: usize) -> EigenTriple {
        let s = BaseSample::rotation_at(0.3819660112501051, 0.4, -(nb as i64), (n + nb) as i64);
        solve_triple(model, pot, &s, TripleParams::new(n, nb, grid)).unwrap()
    }

    #[test]
    fn doubling_cos_pair_is_uncorrelated() {
        let m = ModelSpec::doubling();
        let p = PotentialSpec::zero();
        let t = triple(&m, &p, 10, 4, 2048);
        let c = correlation_series(&t, &m, &p, &cos, &cos, 10).unwrap();
        assert!(c.iter().all(|&v| v < 1e-12), "{c:?}");
        for n in 1..=10 {
            assert!(correlation_direct(&t, &m, &cos, &cos, n).unwrap() < 1e-12);
        }
    }

    #[test]
    fn constant_right_observable_gives_zero() {
        let m = ModelSpec::manneville_pomeau(0.5);
        let p = PotentialSpec::cosine(0.05, 1);
        let t = triple(&m, &p, 12, 96, 1024);
        let one = |_: f64| 2.5;
        let c = correlation_series(&t, &m, &p, &cos, &one, 12).unwrap();
        assert!(c.iter().all(|&v| v < 1e-12), "{c:?}");
    }

    #[test]
    fn operator_and_direct_agree_on_doubling_with_potential() {
        let m = ModelSpec::doubling();
        let p = PotentialSpec::cosine(0.05, 1);
        let t = triple(&m, &p, 6, 40, 4096);
        let u = |x: f64| (TAU * x).sin() + 0.3 * cos(x);
        for n in 1..=4 {
            let a = correlation(&t, &m, &p, &u, &cos, n).unwrap();
            let b = correlation_direct(&t, &m, &u, &cos, n).unwrap();
            assert!((a - b).abs() < 1e-5, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn synthetic_geometric_decay() {
        let values: Vec<f64> = (1..=20).map(|n| 3.0 * 0.4f64.powi(n)).collect();
        let fit = fit_decay_rate(&values).unwrap();
        assert!((fit.tau - 0.4).abs() < 1e-12);
        assert!((fit.tau_upper - 0.4).abs() < 1e-9);
    }

    #[test]
    fn floor_leaves_too_few_points() {
        let values = [1e-3, 1e-5, 1e-8, 1e-14, 1e-15, 1e-16];
        assert!(matches!(fit_decay_rate(&values), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn noisy_decay_band_contains_rate() {
        let values: Vec<f64> = (1..=30).map(|n| 0.5f64.powi(n) * (1.0 + 0.3 * (n as f64).sin())).collect();
        let fit = fit_decay_rate(&values).unwrap();
        assert!(fit.tau_upper > fit.tau && fit.tau_upper < 1.0);
        assert!((fit.tau - 0.5).abs() < 0.02);
    }
}
