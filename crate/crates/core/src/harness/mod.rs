//! Experiment orchestration: configuration and presets, seeded multi-trial
//! runs, aggregation and result files.

mod config;
mod output;
mod run;

pub use config::{load_config, preset, AgentId, EnvConfig, ExperimentConfig, PRESETS};
pub use output::{
    aggregate_csv, emit_results, read_manifest, trials_csv, Manifest, AGGREGATE_CSV, EVAL_CSV,
    MANIFEST, STEPS_CSV, TRIALS_CSV,
};
pub use run::{
    aggregate_trials, episodes_to_threshold, make_env, run_experiment, run_trial, trial_seeds, ExperimentResult,
    LearningCurve, StepLogRow, TrialResult,
};
