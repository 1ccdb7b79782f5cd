//! Experiment harness: config-driven Monte-Carlo runs across seeds, mean
//! regret curves with standard errors, theoretical bounds alongside, and
//! deterministic CSV emission.
//!
//! Determinism contract: the report (and hence every emitted byte) is a pure
//! function of the parsed config. Trial `i` of a policy lane draws from
//! `RewardStream::for_trial(lane_seed, i)`, so neither the worker count nor
//! scheduling order can change any number.

mod config;
mod emit;
mod runner;

pub use config::{
    Baseline, ExperimentConfig, InstanceSpec, Mode, ScheduleSpec, parse_config,
};
pub use emit::{emit_csv, emit_csv_string, emit_curves};
pub use runner::{
    BuiltInstance, ExperimentReport, HarnessError, PolicyCurve, build_instance,
    build_schedule, run_experiment,
};
