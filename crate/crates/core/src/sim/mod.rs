//! Scenario configuration, the per-block trial loop and experiment drivers.

pub mod config;
pub mod learn;
pub mod oracle;
pub mod output;
pub mod streams;
pub mod sweep;
pub mod trial;

pub use config::{Scenario, ScenarioConfig, CALIBRATED_MATCHED_FILTER_LENGTH};
pub use learn::{learning_run, run_learning, LearningReport, LearningRun};
pub use oracle::{oracle_arm_means, ArmMeans};
pub use streams::{stream, stream_seed, Purpose};
pub use sweep::{run_policy, run_sweep, ExperimentReport, PolicyPoint};
pub use trial::{run_trial, run_trial_traced, HopTrace, TrialResult};
