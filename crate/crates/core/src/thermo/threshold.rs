//! Expansion rate `α` and scaling threshold `T₀` for hyperbolic potentials.

use serde::Serialize;

use crate::base::{birkhoff_average, BaseSample};
use crate::fiber::hypotheses::branch_data_at;
use crate::fiber::{ModelSpec, PotentialSpec};
use crate::Result;

/// Window averages entering the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdInputs {
    /// `π₀ = ∫ log deg f_ω dP`.
    pub log_deg: f64,
    /// `∫ log(σ⁻¹p + Lq) dP`.
    pub log_combinatorial: f64,
    /// `∫ log L dP`.
    pub log_l: f64,
    pub dim: usize,
    /// `∫ (sup φ_ω − inf φ_ω) dP`.
    pub oscillation: f64,
}

impl ThresholdInputs {
    /// `π₀ − ∫log(σ⁻¹p+Lq) − dim·∫log L`.
    pub fn margin(&self) -> f64 {
        self.log_deg - self.log_combinatorial - self.dim as f64 * self.log_l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Threshold {
    Applicable { alpha: f64, t0: f64 },
    NotApplicable { margin: f64 },
}

/// `α = margin/2` and `T₀ = oscillation/α`; not applicable when the margin
/// is not positive.
pub fn hyperbolic_threshold(inputs: &ThresholdInputs) -> Threshold {
    let margin = inputs.margin();
    if !(margin > 0.0) {
        return Threshold::NotApplicable { margin };
    }
    let alpha = 0.5 * margin;
    Threshold::Applicable { alpha, t0: inputs.oscillation / alpha }
}

/// Birkhoff averages of the threshold ingredients over `n` fibers.
pub fn threshold_inputs(model: &ModelSpec, potential: &PotentialSpec, sample: &BaseSample, n: usize) -> Result<ThresholdInputs> {
    let log_deg = birkhoff_average(sample, n, |w| (model.fiber(w).degree() as f64).ln())?;
    let log_combinatorial = birkhoff_average(sample, n, |w| branch_data_at(model, w).combinatorial_sum().ln())?;
    let log_l = birkhoff_average(sample, n, |w| branch_data_at(model, w).l.ln())?;
    let oscillation = birkhoff_average(sample, n, |w| potential.at(w).stats().oscillation())?;
    Ok(ThresholdInputs { log_deg, log_combinatorial, log_l, dim: 1, oscillation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp_inputs(osc: f64) -> ThresholdInputs {
        ThresholdInputs { log_deg: 2f64.ln(), log_combinatorial: 1.5f64.ln(), log_l: 0.0, dim: 1, oscillation: osc }
    }

    #[test]
    fn mp_rate() {
        match hyperbolic_threshold(&mp_inputs(0.2)) {
            Threshold::Applicable { alpha, t0 } => {
                assert!((alpha - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-15);
                assert!((t0 - 0.2 / alpha).abs() < 1e-15);
            }
            t => panic!("{t:?}"),
        }
    }

    #[test]
    fn zero_oscillation_gives_zero_threshold() {
        assert!(matches!(hyperbolic_threshold(&mp_inputs(0.0)), Threshold::Applicable { t0, .. } if t0 == 0.0));
    }

    #[test]
    fn formula_arithmetic() {
        let alpha = 0.5 * (8.0f64 / 3.0).ln();
        let inputs = ThresholdInputs { log_deg: 2.0 * alpha, log_combinatorial: 0.0, log_l: 0.0, dim: 1, oscillation: 0.2 };
        match hyperbolic_threshold(&inputs) {
            Threshold::Applicable { t0, .. } => assert!((t0 - 0.4 / (8.0f64 / 3.0).ln()).abs() < 1e-15),
            t => panic!("{t:?}"),
        }
    }

    #[test]
    fn failing_margin_is_not_applicable() {
        let inputs = ThresholdInputs { log_deg: 0.0, log_combinatorial: 0.1, log_l: 0.05, dim: 1, oscillation: 0.2 };
        assert!(matches!(hyperbolic_threshold(&inputs), Threshold::NotApplicable { .. }));
    }

    #[test]
    fn inputs_from_mp_model() {
        let s = BaseSample::rotation_at(0.3, 0.1, 0, 10);
        let i = threshold_inputs(&ModelSpec::manneville_pomeau(0.5), &PotentialSpec::cosine(0.1, 1), &s, 10).unwrap();
        assert!((i.log_deg - 2f64.ln()).abs() < 1e-15);
        assert!((i.log_combinatorial - 1.5f64.ln()).abs() < 1e-15);
        assert_eq!(i.log_l, 0.0);
        assert!((i.oscillation - 0.2).abs() < 1e-15);
    }
}
