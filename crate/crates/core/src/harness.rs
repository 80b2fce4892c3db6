//! Experiment protocol: learning trials alternated with frozen test trials,
//! snapshots after every trial, and the two corridor experiments.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::filter::{FilterConfig, NoveltyFilter};
use crate::simworld::{builtin_world, ArcInterval, WalkOptions, World, SONAR_BEAMS};
use crate::som::NeuronId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub arc_position: f64,
    pub winner: NeuronId,
    pub distance: f64,
    pub novelty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub mean_novelty: f64,
    pub max_novelty: f64,
    pub above_threshold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTrace {
    pub label: String,
    pub world: String,
    pub learning: bool,
    pub records: Vec<TraceRecord>,
}

impl TrialTrace {
    pub fn new(label: impl Into<String>, world: impl Into<String>, learning: bool) -> Self {
        Self {
            label: label.into(),
            world: world.into(),
            learning,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn novelties(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.novelty)
    }

    /// Mean novelty; zero for an empty trace.
    pub fn mean_novelty(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.novelties().sum::<f64>() / self.records.len() as f64
        }
    }

    pub fn max_novelty(&self) -> f64 {
        self.novelties().fold(0.0, f64::max)
    }

    pub fn summary(&self, threshold: f64) -> TraceSummary {
        TraceSummary {
            mean_novelty: self.mean_novelty(),
            max_novelty: self.max_novelty(),
            above_threshold: self.novelties().filter(|&n| n > threshold).count(),
        }
    }

    /// Largest novelty among samples inside any of `intervals`.
    pub fn max_in(&self, intervals: &[ArcInterval]) -> f64 {
        self.records
            .iter()
            .filter(|r| intervals.iter().any(|i| i.contains(r.arc_position)))
            .map(|r| r.novelty)
            .fold(0.0, f64::max)
    }

    /// Largest novelty among samples outside every interval.
    pub fn max_outside(&self, intervals: &[ArcInterval]) -> f64 {
        self.records
            .iter()
            .filter(|r| !intervals.iter().any(|i| i.contains(r.arc_position)))
            .map(|r| r.novelty)
            .fold(0.0, f64::max)
    }
}

/// Walks the world's path once and presents every scan. The filter's
/// learning flag is set for the trial and restored afterwards.
pub fn run_trial(
    filter: &mut NoveltyFilter,
    world: &World,
    learning: bool,
    walk: &WalkOptions,
    label: &str,
) -> Result<TrialTrace> {
    check_dim(filter.grid().input_dim(), SONAR_BEAMS)?;
    let samples = world.walk_path(walk)?;
    let previous = filter.learning_enabled();
    filter.set_learning(learning);
    let mut trace = TrialTrace::new(label, world.name(), learning);
    trace.records.reserve(samples.len());
    let result = samples.iter().try_for_each(|s| {
        let r = filter.present(&s.input)?;
        trace.records.push(TraceRecord {
            arc_position: s.arc_position,
            winner: r.winner,
            distance: r.distance,
            novelty: r.novelty,
        });
        Ok::<_, Error>(())
    });
    filter.set_learning(previous);
    result.map(|_| trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub label: String,
    pub world: String,
    pub learning: bool,
}

/// An explicit trial sequence run against one filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub trials: Vec<TrialSpec>,
    pub filter: FilterConfig,
    pub walk: WalkOptions,
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self, worlds: &[World]) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for t in &self.trials {
            if !seen.insert(t.label.as_str()) {
                return Err(Error::InvalidPlan(format!(
                    "duplicate trial label {:?}",
                    t.label
                )));
            }
            if !worlds.iter().any(|w| w.name() == t.world) {
                return Err(Error::InvalidPlan(format!(
                    "trial {:?} references unknown world {:?}",
                    t.label, t.world
                )));
            }
        }
        Ok(())
    }

    /// Runs every trial in order on a fresh filter, returning the traces and
    /// a snapshot of the filter after each trial.
    pub fn run(&self, worlds: &[World]) -> Result<(Vec<TrialTrace>, Vec<NoveltyFilter>)> {
        self.validate(worlds)?;
        let mut filter = NoveltyFilter::new(self.filter, self.seed)?;
        let mut traces = Vec::with_capacity(self.trials.len());
        let mut snapshots = Vec::with_capacity(self.trials.len());
        for t in &self.trials {
            let world = worlds
                .iter()
                .find(|w| w.name() == t.world)
                .expect("validated above");
            traces.push(run_trial(
                &mut filter,
                world,
                t.learning,
                &self.walk,
                &t.label,
            )?);
            snapshots.push(filter.clone());
        }
        Ok((traces, snapshots))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub filter: FilterConfig,
    pub walk: WalkOptions,
    pub seed: u64,
    /// Training stops once a frozen test trial's mean novelty falls below
    /// this fraction of the resting efficacy.
    pub quiescence_fraction: f64,
    pub max_training_trials: usize,
    /// Learning trials per variant of the forgetting experiment.
    pub forgetting_trials: usize,
    pub report_threshold: f64,
    /// Forgetting during model acquisition (the A and CONTROL training runs
    /// of experiment one). The forgetting experiment always uses
    /// `filter.forgetting_enabled`.
    pub acquisition_forgetting: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            filter: FilterConfig::default(),
            walk: WalkOptions::default(),
            seed: 42,
            quiescence_fraction: 0.1,
            max_training_trials: 10,
            forgetting_trials: 3,
            report_threshold: 0.3,
            acquisition_forgetting: false,
        }
    }
}

impl ExperimentConfig {
    fn acquisition_filter(&self) -> FilterConfig {
        FilterConfig {
            forgetting_enabled: self.acquisition_forgetting,
            ..self.filter
        }
    }

    pub fn quiescence_level(&self) -> f64 {
        self.quiescence_fraction * self.filter.y0
    }

    /// Walk options for the `trial`-th trial of a run; noise is reseeded per trial.
    pub fn walk_for(&self, trial: usize) -> WalkOptions {
        WalkOptions {
            noise_seed: self.walk.noise_seed.wrapping_add(trial as u64),
            ..self.walk
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOneResult {
    /// All trials in execution order: A training, B transfer, CONTROL
    /// training, B after control.
    pub traces: Vec<TrialTrace>,
    /// Frozen-trial mean novelty after each learning trial in A.
    pub a_test_means: Vec<f64>,
    /// Filter state after training in A.
    pub a_filter: NoveltyFilter,
    /// Filter state after each A learning trial.
    pub a_snapshots: Vec<NoveltyFilter>,
    pub transfer_label: String,
    pub control_label: String,
}

impl ExperimentOneResult {
    pub fn trace(&self, label: &str) -> Option<&TrialTrace> {
        self.traces.iter().find(|t| t.label == label)
    }

    pub fn quiesced(&self, config: &ExperimentConfig) -> bool {
        self.a_test_means
            .last()
            .is_some_and(|&m| m < config.quiescence_level())
    }
}

/// Model acquisition in A, transfer to B, and the control run (train in
/// CONTROL, test in B).
pub fn run_experiment_one(config: &ExperimentConfig) -> Result<ExperimentOneResult> {
    let a = builtin_world("A")?;
    let b = builtin_world("B")?;
    let control = builtin_world("CONTROL")?;
    run_experiment_one_in(config, &a, &b, &control)
}

pub fn run_experiment_one_in(
    config: &ExperimentConfig,
    a: &World,
    b: &World,
    control: &World,
) -> Result<ExperimentOneResult> {
    let mut traces = Vec::new();
    let mut filter = NoveltyFilter::new(config.acquisition_filter(), config.seed)?;

    let mut a_test_means = Vec::new();
    let mut a_snapshots = Vec::new();
    for k in 1..=config.max_training_trials {
        let walk = config.walk_for(traces.len());
        traces.push(run_trial(
            &mut filter,
            a,
            true,
            &walk,
            &format!("A-learn-{k}"),
        )?);
        a_snapshots.push(filter.clone());
        let walk = config.walk_for(traces.len());
        let test = run_trial(&mut filter, a, false, &walk, &format!("A-test-{k}"))?;
        a_test_means.push(test.mean_novelty());
        traces.push(test);
        if a_test_means[k - 1] < config.quiescence_level() {
            break;
        }
    }
    let a_filter = filter.clone();

    let transfer_label = "B-after-A".to_string();
    let walk = config.walk_for(traces.len());
    traces.push(run_trial(&mut filter, b, false, &walk, &transfer_label)?);

    // Control: same seed, same number of learning trials, different world.
    let mut ctl = NoveltyFilter::new(config.acquisition_filter(), config.seed)?;
    for k in 1..=a_test_means.len() {
        let walk = config.walk_for(traces.len());
        traces.push(run_trial(
            &mut ctl,
            control,
            true,
            &walk,
            &format!("CONTROL-learn-{k}"),
        )?);
    }
    let control_label = "B-after-CONTROL".to_string();
    let walk = config.walk_for(traces.len());
    traces.push(run_trial(&mut ctl, b, false, &walk, &control_label)?);

    Ok(ExperimentOneResult {
        traces,
        a_test_means,
        a_filter,
        a_snapshots,
        transfer_label,
        control_label,
    })
}

#[derive(Debug, Clone)]
pub struct ForgettingRun {
    /// Baseline frozen trial in A, then alternating learning and frozen trials.
    pub traces: Vec<TrialTrace>,
    pub learn_labels: Vec<String>,
    pub test_labels: Vec<String>,
    pub final_filter: NoveltyFilter,
}

impl ForgettingRun {
    pub fn trace(&self, label: &str) -> Option<&TrialTrace> {
        self.traces.iter().find(|t| t.label == label)
    }

    pub fn learn_traces(&self) -> impl Iterator<Item = &TrialTrace> {
        self.learn_labels.iter().filter_map(|l| self.trace(l))
    }

    pub fn test_traces(&self) -> impl Iterator<Item = &TrialTrace> {
        self.test_labels.iter().filter_map(|l| self.trace(l))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentTwoResult {
    /// Learn in A* (door open), test frozen in A (door closed).
    pub open_door: ForgettingRun,
    /// Learn in B, test frozen in A.
    pub corridor_b: ForgettingRun,
}

impl ExperimentTwoResult {
    pub fn traces(&self) -> impl Iterator<Item = &TrialTrace> {
        self.open_door.traces.iter().chain(&self.corridor_b.traces)
    }
}

/// Forgetting experiment starting from A-trained weights.
pub fn run_experiment_two(
    config: &ExperimentConfig,
    a_filter: &NoveltyFilter,
) -> Result<ExperimentTwoResult> {
    let a = builtin_world("A")?;
    let a_star = builtin_world("A*")?;
    let b = builtin_world("B")?;
    run_experiment_two_in(config, a_filter, &a, &a_star, &b)
}

pub fn run_experiment_two_in(
    config: &ExperimentConfig,
    a_filter: &NoveltyFilter,
    a: &World,
    a_star: &World,
    b: &World,
) -> Result<ExperimentTwoResult> {
    let run = |learn_world: &World, prefix: &str| -> Result<ForgettingRun> {
        let mut filter = a_filter.clone();
        filter.set_forgetting(config.filter.forgetting_enabled);
        let mut traces = Vec::new();
        let (mut learn_labels, mut test_labels) = (Vec::new(), Vec::new());
        let walk = config.walk_for(0);
        traces.push(run_trial(
            &mut filter,
            a,
            false,
            &walk,
            &format!("{prefix}-A-baseline"),
        )?);
        for k in 1..=config.forgetting_trials {
            let label = format!("{prefix}-{}-learn-{k}", learn_world.name());
            let walk = config.walk_for(traces.len());
            traces.push(run_trial(&mut filter, learn_world, true, &walk, &label)?);
            learn_labels.push(label);
            let label = format!("{prefix}-A-test-{k}");
            let walk = config.walk_for(traces.len());
            traces.push(run_trial(&mut filter, a, false, &walk, &label)?);
            test_labels.push(label);
        }
        Ok(ForgettingRun {
            traces,
            learn_labels,
            test_labels,
            final_filter: filter,
        })
    };
    Ok(ExperimentTwoResult {
        open_door: run(a_star, "exp2a")?,
        corridor_b: run(b, "exp2b")?,
    })
}
