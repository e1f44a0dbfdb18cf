//! Fiber map families, potentials and hypothesis checkers.

pub mod hypotheses;
pub mod maps;
pub mod model;
pub mod potential;

pub use hypotheses::{check_hypotheses, HypothesisReport, Verdict};
pub use maps::{circle_delta, phase_distance, BranchData, FiberMap, LocalInverse, Phase, Preimage};
pub use model::{Family, ModelSpec, ParamField};
pub use potential::{potential_stats, FiberPotential, PotentialKind, PotentialSpec, PotentialStats};
