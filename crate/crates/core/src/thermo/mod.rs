//! Thermodynamic diagnostics over solved eigen-triples: dynamic balls, weak
//! Gibbs ratios, correlation decay, pressure estimators, cylinder counts and
//! hyperbolicity thresholds.

pub mod ball;
pub mod correlation;
pub mod cylinder;
pub mod gibbs;
pub mod pressure;
pub mod threshold;

pub use ball::{ball_with_constraints, dynamic_ball, DynamicBall};
pub use correlation::{correlation, correlation_direct, correlation_series, fit_decay_rate, DecayFit};
pub use cylinder::{cylinder_count_dp, cylinder_count_exhaustive, cylinder_series, CylinderCount, CylinderFiber};
pub use gibbs::{gibbs_report, log_ball_mass_direct, weak_gibbs_ratio, GibbsPoint, GibbsReport};
pub use pressure::{
    ensemble_estimate, implied_entropy, pressure_cover, pressure_from_lambda, pressure_separated,
    pressure_separated_raw, separated_set, PressureEstimate, PressureMethod, SeparatedSet,
};
pub use threshold::{hyperbolic_threshold, threshold_inputs, Threshold, ThresholdInputs};
