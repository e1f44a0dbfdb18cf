//! Model families: how a base coordinate ω selects the fiber map `f_ω`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::maps::{BranchData, FiberMap, Phase, Preimage};
use crate::base::{BaseKind, BaseSample, BaseSystem, Omega};
use crate::error::{Error, Result};

/// A real parameter that may depend on the base coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamField {
    Constant(f64),
    PerSymbol(Vec<f64>),
    /// `mean + amplitude·cos(2πω)` on rotation bases.
    Cosine { mean: f64, amplitude: f64 },
}

impl ParamField {
    pub fn eval(&self, w: Omega) -> f64 {
        match self {
            ParamField::Constant(c) => *c,
            ParamField::PerSymbol(v) => match w {
                Omega::Symbol(s) => v[s.min(v.len() - 1)],
                Omega::Point(_) => v[0],
            },
            ParamField::Cosine { mean, amplitude } => mean + amplitude * (TAU * w.value()).cos(),
        }
    }

    /// Closed interval containing every value of the field.
    pub fn range(&self) -> (f64, f64) {
        match self {
            ParamField::Constant(c) => (*c, *c),
            ParamField::PerSymbol(v) => v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x))),
            ParamField::Cosine { mean, amplitude } => (mean - amplitude.abs(), mean + amplitude.abs()),
        }
    }
}

/// Built-in fiber map families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `x ↦ 2x mod 1` on every fiber.
    Doubling,
    /// Circle Manneville–Pomeau maps with contact exponent β(ω) and offset γ(ω).
    MannevillePomeau { beta: ParamField, gamma: ParamField },
    /// Interval pair driven by a shift on {0,1}: symbol 0 uses the
    /// Manneville–Pomeau map, symbol 1 the convex map with `f₁'(0) = 1/L`.
    ExpandInAveragePair { beta: f64, l: f64 },
    /// Circle maps of degree `s + 2` for symbol `s`, with `ell[s]`
    /// intermittent branches (default `s + 1`).
    UnboundedDegree { beta: f64, ell: Vec<usize> },
}

/// A fiber family together with the user-supplied (H4) continuity modulus
/// `ζ(ε) = coeff·ε^power`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub zeta_coeff: f64,
    pub zeta_power: f64,
}

impl ModelSpec {
    pub fn new(family: Family) -> Self {
        Self { family, zeta_coeff: 0.2, zeta_power: 2.0 }
    }

    pub fn doubling() -> Self {
        Self::new(Family::Doubling)
    }

    /// Deterministic Manneville–Pomeau map with exponent `beta` and no offset.
    pub fn manneville_pomeau(beta: f64) -> Self {
        Self::new(Family::MannevillePomeau { beta: ParamField::Constant(beta), gamma: ParamField::Constant(0.0) })
    }

    pub fn random_mp(beta: ParamField, gamma: ParamField) -> Self {
        Self::new(Family::MannevillePomeau { beta, gamma })
    }

    pub fn pair(beta: f64, l: f64) -> Self {
        Self::new(Family::ExpandInAveragePair { beta, l })
    }

    pub fn unbounded(beta: f64, ell: Vec<usize>) -> Self {
        Self::new(Family::UnboundedDegree { beta, ell })
    }

    pub fn phase(&self) -> Phase {
        match self.family {
            Family::ExpandInAveragePair { .. } => Phase::Interval,
            _ => Phase::Circle,
        }
    }

    /// Check parameter ranges and compatibility with the base.
    pub fn validate(&self, base: &BaseSystem) -> Result<()> {
        let beta_ok = |lo: f64, hi: f64| lo > 0.0 && hi < 1.0;
        match &self.family {
            Family::Doubling => {}
            Family::MannevillePomeau { beta, .. } => {
                let (lo, hi) = beta.range();
                if !beta_ok(lo, hi) {
                    return Err(Error::Config(format!("beta range [{lo}, {hi}] not inside (0,1)")));
                }
            }
            Family::ExpandInAveragePair { beta, l } => {
                if !beta_ok(*beta, *beta) {
                    return Err(Error::Config(format!("beta {beta} not in (0,1)")));
                }
                if !(*l > 1.0) {
                    return Err(Error::Config(format!("L = {l} must exceed 1")));
                }
                if base.alphabet_size() != Some(2) {
                    return Err(Error::Config("expand-in-average pair needs a shift on two symbols".into()));
                }
            }
            Family::UnboundedDegree { beta, ell } => {
                if !beta_ok(*beta, *beta) {
                    return Err(Error::Config(format!("beta {beta} not in (0,1)")));
                }
                let Some(n) = base.alphabet_size() else {
                    return Err(Error::Config("unbounded-degree family needs a shift base".into()));
                };
                for (s, &l) in ell.iter().enumerate() {
                    if l >= s + 2 {
                        return Err(Error::Config(format!("ell[{s}] = {l} must be below the degree {}", s + 2)));
                    }
                }
                if !ell.is_empty() && ell.len() < n {
                    return Err(Error::Config(format!("ell has {} entries for {n} symbols", ell.len())));
                }
            }
        }
        if let BaseKind::Rotation { .. } = base.kind {
            if matches!(self.family, Family::ExpandInAveragePair { .. } | Family::UnboundedDegree { .. }) {
                return Err(Error::Config("this family is driven by a shift base".into()));
            }
        }
        if !(self.zeta_coeff > 0.0 && self.zeta_power > 0.0) {
            return Err(Error::Config("continuity modulus coefficients must be positive".into()));
        }
        Ok(())
    }

    /// The fiber map selected by a base coordinate.
    pub fn fiber(&self, w: Omega) -> FiberMap {
        match &self.family {
            Family::Doubling => FiberMap::Circle { k: 2, ell: 0, beta: 0.0, shift: 0.0 },
            Family::MannevillePomeau { beta, gamma } => {
                FiberMap::Circle { k: 2, ell: 1, beta: beta.eval(w), shift: gamma.eval(w).rem_euclid(1.0) }
            }
            Family::ExpandInAveragePair { beta, l } => match w {
                Omega::Symbol(1) => FiberMap::IntervalConvex { l: *l },
                _ => FiberMap::IntervalMp { beta: *beta },
            },
            Family::UnboundedDegree { beta, ell } => {
                let s = match w {
                    Omega::Symbol(s) => s,
                    Omega::Point(_) => 0,
                };
                let k = s + 2;
                let l = ell.get(s).copied().unwrap_or(k - 1);
                FiberMap::Circle { k, ell: l, beta: *beta, shift: 0.0 }
            }
        }
    }

    /// Fiber map at `θ^k ω`.
    pub fn fiber_at(&self, sample: &BaseSample, k: i64) -> Result<FiberMap> {
        Ok(self.fiber(sample.at(k)?))
    }

    pub fn eval_forward(&self, sample: &BaseSample, x: f64) -> f64 {
        self.fiber(sample.omega()).eval(x)
    }

    pub fn inverse_branches(&self, sample: &BaseSample, x: f64) -> Result<Vec<Preimage>> {
        self.fiber(sample.omega()).preimages(x)
    }

    pub fn branch_data(&self, sample: &BaseSample) -> BranchData {
        self.fiber(sample.omega()).branch_data()
    }

    /// Short label used in manifests.
    pub fn label(&self) -> &'static str {
        match self.family {
            Family::Doubling => "doubling",
            Family::MannevillePomeau { .. } => "manneville-pomeau",
            Family::ExpandInAveragePair { .. } => "expand-in-average-pair",
            Family::UnboundedDegree { .. } => "unbounded-degree",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_selects_map_by_symbol() {
        let m = ModelSpec::pair(0.5, 1.2);
        let s = BaseSample::shift_from(vec![0, 1], 0);
        assert_eq!(m.fiber_at(&s, 0).unwrap().branch_data().deg, 2);
        let b1 = m.fiber_at(&s, 1).unwrap().branch_data();
        assert_eq!((b1.deg, b1.p, b1.q, b1.sigma, b1.l), (1, 0, 1, None, 1.2));
    }

    #[test]
    fn unbounded_degree_by_symbol() {
        let m = ModelSpec::unbounded(0.5, vec![]);
        let s = BaseSample::shift_from(vec![0, 3], 0);
        let b = m.fiber_at(&s, 1).unwrap().branch_data();
        assert_eq!((b.deg, b.p, b.q), (5, 1, 4));
        assert_eq!(m.fiber_at(&s, 0).unwrap().branch_data().deg, 2);
    }

    #[test]
    fn validation_catches_ranges() {
        let rot = BaseSystem::golden_rotation(0);
        assert!(ModelSpec::manneville_pomeau(1.2).validate(&rot).is_err());
        assert!(ModelSpec::manneville_pomeau(0.5).validate(&rot).is_ok());
        assert!(ModelSpec::pair(0.5, 1.2).validate(&rot).is_err());
        let sh = BaseSystem::bernoulli(vec![0.5, 0.5], 0).unwrap();
        assert!(ModelSpec::pair(0.5, 0.9).validate(&sh).is_err());
        assert!(ModelSpec::pair(0.5, 1.2).validate(&sh).is_ok());
    }
}
