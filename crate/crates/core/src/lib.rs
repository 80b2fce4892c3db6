//! Habituating self-organising map novelty filter, a deterministic corridor
//! sonar simulator, and the experiment harness that drives them.

pub mod cli;
pub mod error;
pub mod filter;
pub mod habituation;
pub mod harness;
pub mod persist;
pub mod simworld;
pub mod som;

pub use error::{Error, Result};
pub use filter::{FilterConfig, NoveltyFilter, NoveltyReading, StimulusScale};
pub use habituation::{HabituationParams, Synapse};
pub use harness::{
    run_experiment_one, run_experiment_two, run_trial, ExperimentConfig, ExperimentPlan, TrialSpec,
    TrialTrace,
};
pub use simworld::{builtin_world, Pose, ScanSample, WalkOptions, World};
pub use som::{NeuronId, SomConfig, SomGrid};
