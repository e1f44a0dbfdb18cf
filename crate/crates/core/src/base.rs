//! Ergodic invertible base systems driving the fiber maps.
//!
//! Two bases are available: an irrational circle rotation and a two-sided
//! Bernoulli shift over a finite alphabet (countable alphabets are truncated
//! at an index `K`, the tail mass being folded into the last symbol).
//! A [`BaseSample`] is a point ω together with a materialized window of its
//! θ-orbit, so every fiber `θ^k ω` with `k` in the window can be resolved
//! without further randomness.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fractional part of the golden ratio.
pub const GOLDEN_ANGLE: f64 = 0.618_033_988_749_894_9;

/// Kind of base transformation θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaseKind {
    /// θ(ω) = ω + angle mod 1.
    Rotation { angle: f64 },
    /// Two-sided Bernoulli shift with symbol probabilities `probs`.
    Shift { probs: Vec<f64> },
}

/// The base (Ω, θ, P) together with the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseSystem {
    pub kind: BaseKind,
    pub seed: u64,
    /// Probability mass folded into the last symbol when a countable
    /// alphabet was truncated.
    pub tail_mass: f64,
}

impl BaseSystem {
    pub fn rotation(angle: f64, seed: u64) -> Result<Self> {
        if !(angle > 0.0 && angle < 1.0) {
            return Err(Error::Config(format!("rotation angle {angle} not in (0,1)")));
        }
        Ok(Self { kind: BaseKind::Rotation { angle }, seed, tail_mass: 0.0 })
    }

    pub fn golden_rotation(seed: u64) -> Self {
        Self { kind: BaseKind::Rotation { angle: GOLDEN_ANGLE }, seed, tail_mass: 0.0 }
    }

    /// Bernoulli shift over a finite alphabet.
    pub fn bernoulli(probs: Vec<f64>, seed: u64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Config("empty probability vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p > 0.0)) {
            return Err(Error::Config(format!("probability entry {p} is not positive")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { kind: BaseKind::Shift { probs }, seed, tail_mass: 0.0 })
    }

    /// Countable alphabet given by its leading masses, truncated at index `k`.
    ///
    /// Symbols `0..k` keep their masses and symbol `k` receives the whole tail
    /// `1 - Σ_{s<k} a_s`.
    pub fn countable(leading: &[f64], k: usize, seed: u64) -> Result<Self> {
        if leading.len() < k {
            return Err(Error::Config(format!(
                "truncation index {k} exceeds the {} supplied masses",
                leading.len()
            )));
        }
        let head: f64 = leading[..k].iter().sum();
        let tail = 1.0 - head;
        if tail <= 0.0 {
            return Err(Error::Config(format!(
                "leading masses sum to {head}, leaving no tail for symbol {k}"
            )));
        }
        let mut probs = leading[..k].to_vec();
        probs.push(tail);
        let mut sys = Self::bernoulli(probs, seed)?;
        sys.tail_mass = tail;
        Ok(sys)
    }

    /// Geometric law a_s = (1-r) r^s truncated at `k`.
    pub fn geometric(r: f64, k: usize, seed: u64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Config(format!("geometric ratio {r} not in (0,1)")));
        }
        let leading: Vec<f64> = (0..k).map(|s| (1.0 - r) * r.powi(s as i32)).collect();
        Self::countable(&leading, k, seed)
    }

    pub fn alphabet_size(&self) -> Option<usize> {
        match &self.kind {
            BaseKind::Rotation { .. } => None,
            BaseKind::Shift { probs } => Some(probs.len()),
        }
    }

    fn rng_for(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Materialize sample number `index` over the relative window `[lo, hi]`.
    pub fn sample(&self, index: u64, lo: i64, hi: i64) -> Result<BaseSample> {
        if lo > hi {
            return Err(Error::Config(format!("empty window [{lo}, {hi}]")));
        }
        let mut rng = self.rng_for(index);
        let state = match &self.kind {
            BaseKind::Rotation { angle } => State::Rotation { anchor: rng.random::<f64>(), angle: *angle },
            BaseKind::Shift { probs } => {
                let cdf = cumulative(probs);
                let symbols: Vec<u32> =
                    (lo..=hi).map(|_| draw_symbol(&cdf, rng.random::<f64>())).collect();
                State::Shift { symbols: symbols.into(), origin: -lo }
            }
        };
        Ok(BaseSample { state, lo, hi, offset: 0, index })
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn draw_symbol(cdf: &[f64], u: f64) -> u32 {
    let total = *cdf.last().unwrap_or(&1.0);
    let target = u * total;
    cdf.iter().position(|&c| target < c).unwrap_or(cdf.len() - 1) as u32
}

/// One fiber coordinate of the base: either a rotation angle or a symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Omega {
    Point(f64),
    Symbol(usize),
}

impl Omega {
    /// Rotation coordinate, or the symbol index as a real for shifts.
    pub fn value(self) -> f64 {
        match self {
            Omega::Point(w) => w,
            Omega::Symbol(s) => s as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum State {
    Rotation { anchor: f64, angle: f64 },
    Shift { symbols: Arc<[u32]>, origin: i64 },
}

/// A point ω of the base with a materialized window of its θ-orbit.
///
/// The window `[lo, hi]` is stored relative to the originally sampled point;
/// `offset` records how far the sample has been advanced.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseSample {
    state: State,
    lo: i64,
    hi: i64,
    offset: i64,
    index: u64,
}

impl BaseSample {
    /// Rotation sample at a prescribed point, with window `[lo, hi]`.
    pub fn rotation_at(angle: f64, omega: f64, lo: i64, hi: i64) -> Self {
        Self { state: State::Rotation { anchor: omega.rem_euclid(1.0), angle }, lo, hi, offset: 0, index: 0 }
    }

    /// Shift sample from an explicit symbol window; `symbols[0]` sits at shift `lo`.
    pub fn shift_from(symbols: Vec<u32>, lo: i64) -> Self {
        let hi = lo + symbols.len() as i64 - 1;
        Self { state: State::Shift { symbols: symbols.into(), origin: -lo }, lo, hi, offset: 0, index: 0 }
    }

    /// Sample index within its ensemble.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Reachable shifts relative to the current point.
    pub fn window(&self) -> (i64, i64) {
        (self.lo - self.offset, self.hi - self.offset)
    }

    pub fn covers(&self, k_lo: i64, k_hi: i64) -> bool {
        let (lo, hi) = self.window();
        lo <= k_lo && k_hi <= hi
    }

    fn check(&self, k: i64) -> Result<i64> {
        let abs = self.offset + k;
        if abs < self.lo || abs > self.hi {
            let (lo, hi) = self.window();
            return Err(Error::OutOfWindow { k, lo, hi });
        }
        Ok(abs)
    }

    /// Coordinate of θ^k ω.
    pub fn at(&self, k: i64) -> Result<Omega> {
        let abs = self.check(k)?;
        Ok(self.coordinate(abs))
    }

    fn coordinate(&self, abs: i64) -> Omega {
        match &self.state {
            State::Rotation { anchor, angle } => Omega::Point(rotate(*anchor, *angle, abs)),
            State::Shift { symbols, origin } => Omega::Symbol(symbols[(abs + origin) as usize] as usize),
        }
    }

    /// Coordinate of ω itself.
    pub fn omega(&self) -> Omega {
        self.coordinate(self.offset)
    }

    /// θ^k ω as a new sample sharing the materialized window.
    pub fn advance(&self, k: i64) -> Result<BaseSample> {
        self.check(k)?;
        let mut next = self.clone();
        next.offset += k;
        Ok(next)
    }

    /// Symbols of the whole window (shift bases only).
    pub fn symbols(&self) -> Option<Vec<u32>> {
        match &self.state {
            State::Shift { symbols, .. } => Some(symbols.to_vec()),
            State::Rotation { .. } => None,
        }
    }
}

fn rotate(anchor: f64, angle: f64, k: i64) -> f64 {
    let step = (k as f64 * angle).rem_euclid(1.0);
    let w = anchor + step;
    if w >= 1.0 {
        w - 1.0
    } else {
        w
    }
}

/// Draw `count` independent samples with relative window `[lo, hi]`.
///
/// Sample `i` uses its own ChaCha stream keyed by `(seed, i)`, so the result
/// does not depend on the number of worker threads.
pub fn sample_base(system: &BaseSystem, count: usize, lo: i64, hi: i64) -> Result<Vec<BaseSample>> {
    if count == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    (0..count as u64).into_par_iter().map(|i| system.sample(i, lo, hi)).collect()
}

/// Sample mean and standard error of a per-ω field.
pub fn ensemble_average<F>(samples: &[BaseSample], field: F) -> Result<(f64, f64)>
where
    F: Fn(&BaseSample) -> f64 + Sync,
{
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let values: Vec<f64> = samples.par_iter().map(&field).collect();
    Ok(mean_stderr(&values))
}

/// Mean and standard error of the mean, summed in index order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Birkhoff average (1/n) Σ_{j<n} field(θ^j ω) along one sample.
pub fn birkhoff_average<F>(sample: &BaseSample, n: usize, field: F) -> Result<f64>
where
    F: Fn(Omega) -> f64,
{
    if n == 0 {
        return Err(Error::Precondition("Birkhoff average needs n >= 1".into()));
    }
    let mut acc = 0.0;
    for j in 0..n as i64 {
        acc += field(sample.at(j)?);
    }
    Ok(acc / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_samples_are_reproducible() {
        let sys = BaseSystem::golden_rotation(7);
        let a = sample_base(&sys, 3, 0, 0).unwrap();
        let b = sample_base(&sys, 3, 0, 0).unwrap();
        assert_eq!(a, b);
        for s in &a {
            let w = s.omega().value();
            assert!((0.0..1.0).contains(&w));
        }
    }

    #[test]
    fn shift_window_has_alphabet_symbols() {
        let sys = BaseSystem::bernoulli(vec![0.5, 0.5], 3).unwrap();
        let s = &sample_base(&sys, 1, -4, 4).unwrap()[0];
        let syms = s.symbols().unwrap();
        assert_eq!(syms.len(), 9);
        assert!(syms.iter().all(|&v| v < 2));
    }

    #[test]
    fn rotation_advance_formula() {
        let s = BaseSample::rotation_at(0.618_033_988_7, 0.0, -2, 2);
        let w = s.advance(1).unwrap().omega().value();
        assert!((w - 0.618_033_988_7).abs() < 1e-15);
        assert_eq!(s.advance(0).unwrap(), s);
    }

    #[test]
    fn advance_is_invertible() {
        let sys = BaseSystem::bernoulli(vec![0.3, 0.7], 1).unwrap();
        let s = sys.sample(5, -10, 10).unwrap();
        let back = s.advance(3).unwrap().advance(-3).unwrap();
        assert_eq!(back, s);
        let r = BaseSystem::golden_rotation(1).sample(2, -10, 10).unwrap();
        assert_eq!(r.advance(7).unwrap().advance(-7).unwrap(), r);
    }

    #[test]
    fn advance_outside_window_fails() {
        let s = BaseSample::rotation_at(0.5, 0.1, -1, 3);
        assert!(matches!(s.advance(4), Err(Error::OutOfWindow { .. })));
        assert!(s.advance(3).unwrap().advance(1).is_err());
        assert!(s.at(-2).is_err());
    }

    #[test]
    fn bad_probability_vector_is_rejected() {
        assert!(BaseSystem::bernoulli(vec![0.5, 0.6], 0).is_err());
        assert!(BaseSystem::bernoulli(vec![1.0, 0.0], 0).is_err());
        assert!(BaseSystem::rotation(1.5, 0).is_err());
    }

    #[test]
    fn countable_truncation_folds_tail() {
        let sys = BaseSystem::geometric(0.5, 4, 0).unwrap();
        match &sys.kind {
            BaseKind::Shift { probs } => {
                assert_eq!(probs.len(), 5);
                assert!((probs[4] - 0.0625).abs() < 1e-15);
                assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
        assert!((sys.tail_mass - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn constant_field_has_zero_stderr() {
        let sys = BaseSystem::golden_rotation(0);
        let samples = sample_base(&sys, 20, 0, 0).unwrap();
        let (m, se) = ensemble_average(&samples, |_| 2.5).unwrap();
        assert_eq!(m, 2.5);
        assert_eq!(se, 0.0);
        assert!(matches!(ensemble_average(&[], |_| 1.0), Err(Error::EmptyEnsemble)));
    }

    #[test]
    fn rotation_birkhoff_average_of_identity() {
        let s = BaseSample::rotation_at(GOLDEN_ANGLE, 0.2, 0, 10_000);
        let avg = birkhoff_average(&s, 10_000, |w| w.value()).unwrap();
        assert!((avg - 0.5).abs() < 0.01, "{avg}");
    }
}
