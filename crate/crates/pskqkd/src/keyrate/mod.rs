//! Two-step key-rate computation: Frank-Wolfe upper bound, dual lower bound,
//! postselection statistics and the final rate.

pub mod maps;
pub mod objective;
pub mod pipeline;
pub mod solve;
pub mod stats;

pub use maps::{build_maps, PostprocessingMaps};
pub use objective::{evaluate, gradient, objective, ObjectiveEval};
pub use pipeline::{
    build_region_set, compute_key_rate, compute_key_rate_detailed, KeyRateResult, RunArtifacts,
    RunStatus, ScenarioConfig,
};
pub use solve::{
    frank_wolfe, initial_point, step2_lower_bound, zeta_eps, FwConfig, FwIterate, FwOutcome,
    FwStop, Step2Outcome,
};
pub use stats::{displaced_thermal, honest_state, postselection_stats, PostselectionStats};
