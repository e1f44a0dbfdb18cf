//! Potentials φ_ω and their closed-form statistics.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::model::ParamField;
use crate::base::{BaseSample, Omega};

/// Shape of the potential before scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialKind {
    Constant { c: f64 },
    /// `amplitude·cos(2π·frequency·x)`.
    Cosine { amplitude: f64, frequency: u32 },
}

/// φ_ω(x) = scale·m(ω)·shape(x) + offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Inverse temperature factor `1/T`.
    pub scale: f64,
    pub modulation: Option<ParamField>,
    pub offset: f64,
}

/// Sup, inf and derivative norm of one fiber potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialStats {
    pub sup: f64,
    pub inf: f64,
    pub deriv_norm: f64,
}

impl PotentialStats {
    pub fn oscillation(&self) -> f64 {
        self.sup - self.inf
    }
}

/// A potential resolved on one fiber: `offset + amplitude·cos(2π m x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberPotential {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: u32,
}

impl FiberPotential {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if self.amplitude == 0.0 {
            self.offset
        } else {
            self.offset + self.amplitude * (TAU * self.frequency as f64 * x).cos()
        }
    }

    /// `φ(x + t) − φ(x)` without cancellation for small `t`.
    #[inline]
    pub fn delta(&self, x: f64, t: f64) -> f64 {
        if self.is_constant() {
            return 0.0;
        }
        let m = self.frequency as f64;
        -2.0 * self.amplitude * (TAU * m * (x + 0.5 * t)).sin() * (std::f64::consts::PI * m * t).sin()
    }

    pub fn stats(&self) -> PotentialStats {
        let a = if self.frequency == 0 { 0.0 } else { self.amplitude.abs() };
        let base = if self.frequency == 0 { self.offset + self.amplitude } else { self.offset };
        PotentialStats { sup: base + a, inf: base - a, deriv_norm: a * TAU * self.frequency as f64 }
    }

    pub fn is_constant(&self) -> bool {
        self.amplitude == 0.0 || self.frequency == 0
    }
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self { kind: PotentialKind::Constant { c }, scale: 1.0, modulation: None, offset: 0.0 }
    }

    pub fn cosine(amplitude: f64, frequency: u32) -> Self {
        Self { kind: PotentialKind::Cosine { amplitude, frequency }, scale: 1.0, modulation: None, offset: 0.0 }
    }

    /// The potential `factor·φ` (for `factor = 1/T`).
    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self.offset *= factor;
        self
    }

    /// The potential `φ + c`.
    pub fn shifted(mut self, c: f64) -> Self {
        self.offset += c;
        self
    }

    pub fn with_modulation(mut self, m: ParamField) -> Self {
        self.modulation = Some(m);
        self
    }

    pub fn at(&self, w: Omega) -> FiberPotential {
        let m = self.modulation.as_ref().map_or(1.0, |f| f.eval(w));
        let factor = self.scale * m;
        match self.kind {
            PotentialKind::Constant { c } => FiberPotential { offset: factor * c + self.offset, amplitude: 0.0, frequency: 0 },
            PotentialKind::Cosine { amplitude, frequency } => {
                FiberPotential { offset: self.offset, amplitude: factor * amplitude, frequency }
            }
        }
    }

    pub fn stats(&self, sample: &BaseSample) -> PotentialStats {
        self.at(sample.omega()).stats()
    }
}

/// Closed-form statistics of the potential at ω.
pub fn potential_stats(potential: &PotentialSpec, sample: &BaseSample) -> PotentialStats {
    potential.stats(sample)
}
