//! Python bindings for the habituating SOM novelty filter.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use hsom::harness::{self, ExperimentConfig};
use hsom::{persist, simworld};

fn to_py(e: hsom::Error) -> PyErr {
    match e {
        hsom::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Self-organising map on a rectangular lattice.
#[pyclass(module = "hsom_py", skip_from_py_object)]
#[derive(Clone)]
struct SomGrid {
    inner: hsom::SomGrid,
}

#[pymethods]
impl SomGrid {
    #[new]
    #[pyo3(signature = (width=10, height=10, input_dim=16, learning_rate=0.25, seed=0))]
    fn new(
        width: usize,
        height: usize,
        input_dim: usize,
        learning_rate: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let config = hsom::SomConfig {
            width,
            height,
            input_dim,
            learning_rate,
            ..hsom::SomConfig::default()
        };
        let inner = hsom::SomGrid::random(config, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (width, height, weights, learning_rate=0.25))]
    fn from_weights(
        width: usize,
        height: usize,
        weights: Vec<Vec<f64>>,
        learning_rate: f64,
    ) -> PyResult<Self> {
        let config = hsom::SomConfig {
            width,
            height,
            input_dim: weights.first().map_or(0, Vec::len),
            learning_rate,
            ..hsom::SomConfig::default()
        };
        let inner = hsom::SomGrid::from_weights(config, weights).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        (
            self.inner.width(),
            self.inner.height(),
            self.inner.input_dim(),
        )
    }

    /// Returns `(winner_index, squared_distance)`.
    fn find_winner(&self, input: Vec<f64>) -> PyResult<(usize, f64)> {
        let (n, d) = self.inner.find_winner(&input).map_err(to_py)?;
        Ok((n.index(), d))
    }

    fn distance(&self, neuron: usize, input: Vec<f64>) -> PyResult<f64> {
        let n = self.inner.neuron(neuron).map_err(to_py)?;
        self.inner.distance(n, &input).map_err(to_py)
    }

    fn neighbourhood(&self, neuron: usize) -> PyResult<Vec<usize>> {
        let n = self.inner.neuron(neuron).map_err(to_py)?;
        let members = self.inner.neighbourhood(n).map_err(to_py)?;
        Ok(members.into_iter().map(|m| m.index()).collect())
    }

    /// Moves the winner and its neighbours towards `input`; returns the
    /// indices that moved.
    fn update_weights(&mut self, winner: usize, input: Vec<f64>) -> PyResult<Vec<usize>> {
        let n = self.inner.neuron(winner).map_err(to_py)?;
        let members = self.inner.update_weights(n, &input).map_err(to_py)?;
        Ok(members.into_iter().map(|m| m.index()).collect())
    }

    fn weights(&self, neuron: usize) -> PyResult<Vec<f64>> {
        let n = self.inner.neuron(neuron).map_err(to_py)?;
        Ok(self.inner.weights(n).to_vec())
    }
}

/// Per-sample record of one trial.
#[pyclass(module = "hsom_py", get_all, skip_from_py_object)]
#[derive(Clone)]
struct Trace {
    label: String,
    world: String,
    learning: bool,
    arc_positions: Vec<f64>,
    winners: Vec<usize>,
    distances: Vec<f64>,
    novelties: Vec<f64>,
}

impl From<&harness::TrialTrace> for Trace {
    fn from(t: &harness::TrialTrace) -> Self {
        Self {
            label: t.label.clone(),
            world: t.world.clone(),
            learning: t.learning,
            arc_positions: t.records.iter().map(|r| r.arc_position).collect(),
            winners: t.records.iter().map(|r| r.winner.index()).collect(),
            distances: t.records.iter().map(|r| r.distance).collect(),
            novelties: t.records.iter().map(|r| r.novelty).collect(),
        }
    }
}

#[pymethods]
impl Trace {
    fn __len__(&self) -> usize {
        self.novelties.len()
    }

    fn mean_novelty(&self) -> f64 {
        if self.novelties.is_empty() {
            0.0
        } else {
            self.novelties.iter().sum::<f64>() / self.novelties.len() as f64
        }
    }

    fn max_novelty(&self) -> f64 {
        self.novelties.iter().copied().fold(0.0, f64::max)
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace({:?}, world={:?}, samples={})",
            self.label,
            self.world,
            self.novelties.len()
        )
    }
}

/// Corridor world with a sonar simulator.
#[pyclass(module = "hsom_py", skip_from_py_object)]
#[derive(Clone)]
struct World {
    inner: simworld::World,
}

#[pymethods]
impl World {
    /// One of the builtin environments: A, B, A*, CONTROL.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: hsom::builtin_world(name).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: simworld::World::load(&path).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn parse(name: &str, text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: simworld::World::parse(name, text).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    fn path_length(&self) -> f64 {
        self.inner.path_length()
    }

    /// Door regions as `(start, end)` arc positions along the path.
    fn door_intervals(&self) -> Vec<(f64, f64)> {
        self.inner
            .door_intervals()
            .iter()
            .map(|i| (i.start, i.end))
            .collect()
    }

    /// Inverted sonar ranges (16 beams) from a pose.
    fn sonar_scan(&self, x: f64, y: f64, heading: f64) -> Vec<f64> {
        self.inner
            .sonar_scan(&hsom::Pose::new(x, y, heading))
            .input
            .to_vec()
    }

    /// Sonar inputs for every sample of one traverse.
    #[pyo3(signature = (smoothing=3, noise=0.0, noise_seed=0))]
    fn walk(&self, smoothing: usize, noise: f64, noise_seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let opts = hsom::WalkOptions {
            smoothing_window: smoothing,
            noise_amplitude: noise,
            noise_seed,
            ..hsom::WalkOptions::default()
        };
        let scans = self.inner.walk_path(&opts).map_err(to_py)?;
        Ok(scans.into_iter().map(|s| s.input.to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        format!("World({:?})", self.inner.name())
    }
}

/// SOM with habituating output synapses.
#[pyclass(module = "hsom_py", skip_from_py_object)]
#[derive(Clone)]
struct NoveltyFilter {
    inner: hsom::NoveltyFilter,
}

#[pymethods]
impl NoveltyFilter {
    #[new]
    #[pyo3(signature = (seed=42, stimulus_scale="unit", forgetting=true))]
    fn new(seed: u64, stimulus_scale: &str, forgetting: bool) -> PyResult<Self> {
        let config = hsom::FilterConfig {
            stimulus_scale: stimulus_scale.parse().map_err(to_py)?,
            forgetting_enabled: forgetting,
            ..hsom::FilterConfig::default()
        };
        Ok(Self {
            inner: hsom::NoveltyFilter::new(config, seed).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: persist::load_snapshot(&path).map_err(to_py)?,
        })
    }

    #[pyo3(signature = (path, label=""))]
    fn save(&self, path: PathBuf, label: &str) -> PyResult<()> {
        persist::save_snapshot(&self.inner, label, &path).map_err(to_py)
    }

    #[getter]
    fn learning(&self) -> bool {
        self.inner.learning_enabled()
    }

    #[setter]
    fn set_learning(&mut self, enabled: bool) {
        self.inner.set_learning(enabled);
    }

    #[getter]
    fn forgetting(&self) -> bool {
        self.inner.forgetting_enabled()
    }

    #[setter]
    fn set_forgetting(&mut self, enabled: bool) {
        self.inner.set_forgetting(enabled);
    }

    #[getter]
    fn efficacies(&self) -> Vec<f64> {
        self.inner.efficacies().to_vec()
    }

    #[getter]
    fn grid(&self) -> SomGrid {
        SomGrid {
            inner: self.inner.grid().clone(),
        }
    }

    /// Presents one input; returns `(winner, distance, novelty)`.
    fn present(&mut self, input: Vec<f64>) -> PyResult<(usize, f64, f64)> {
        let r = self.inner.present(&input).map_err(to_py)?;
        Ok((r.winner.index(), r.distance, r.novelty))
    }

    /// Novelty of an input without changing any state.
    fn evaluate(&self, input: Vec<f64>) -> PyResult<(usize, f64, f64)> {
        let r = self.inner.evaluate(&input).map_err(to_py)?;
        Ok((r.winner.index(), r.distance, r.novelty))
    }

    /// Novelty for each input in order.
    fn novelty_trace(&mut self, inputs: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let readings = self
            .inner
            .novelty_trace(inputs.iter().map(Vec::as_slice))
            .map_err(to_py)?;
        Ok(readings.into_iter().map(|r| r.novelty).collect())
    }

    /// One traverse of `world`; the learning flag applies to this trial only.
    #[pyo3(signature = (world, learning, label=None, smoothing=3, noise=0.0, noise_seed=0))]
    fn run_trial(
        &mut self,
        world: &World,
        learning: bool,
        label: Option<String>,
        smoothing: usize,
        noise: f64,
        noise_seed: u64,
    ) -> PyResult<Trace> {
        let opts = hsom::WalkOptions {
            smoothing_window: smoothing,
            noise_amplitude: noise,
            noise_seed,
            ..hsom::WalkOptions::default()
        };
        let label = label.unwrap_or_else(|| world.inner.name().to_string());
        let trace = hsom::run_trial(&mut self.inner, &world.inner, learning, &opts, &label)
            .map_err(to_py)?;
        Ok(Trace::from(&trace))
    }

    fn state_hash(&self) -> String {
        self.inner.state_hash()
    }
}

/// Exact habituation step: tau * dy/dt = alpha * (y0 - y) - s over `dt`.
#[pyfunction]
#[pyo3(signature = (efficacy, stimulus, tau, dt=1.0, alpha=1.05, y0=1.0))]
fn integrate(
    efficacy: f64,
    stimulus: f64,
    tau: f64,
    dt: f64,
    alpha: f64,
    y0: f64,
) -> PyResult<f64> {
    let params = hsom::HabituationParams::new(alpha, y0, tau).map_err(to_py)?;
    hsom::habituation::integrate(&params, efficacy, stimulus, dt).map_err(to_py)
}

fn experiment_config(seed: u64, forgetting: bool) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        seed,
        ..ExperimentConfig::default()
    };
    c.filter.forgetting_enabled = forgetting;
    c.walk.noise_seed = seed;
    c
}

/// Model acquisition in A, transfer to B and the control run. Returns the
/// traces in execution order and the A-trained filter.
#[pyfunction]
#[pyo3(signature = (seed=42))]
fn experiment_one(seed: u64) -> PyResult<(Vec<Trace>, NoveltyFilter)> {
    let r = harness::run_experiment_one(&experiment_config(seed, true)).map_err(to_py)?;
    Ok((
        r.traces.iter().map(Trace::from).collect(),
        NoveltyFilter { inner: r.a_filter },
    ))
}

/// Forgetting experiment from an A-trained filter; returns all traces.
#[pyfunction]
#[pyo3(signature = (a_filter, forgetting=true, seed=42))]
fn experiment_two(a_filter: &NoveltyFilter, forgetting: bool, seed: u64) -> PyResult<Vec<Trace>> {
    let r = harness::run_experiment_two(&experiment_config(seed, forgetting), &a_filter.inner)
        .map_err(to_py)?;
    Ok(r.traces().map(Trace::from).collect())
}

#[pymodule]
fn hsom_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SomGrid>()?;
    m.add_class::<NoveltyFilter>()?;
    m.add_class::<World>()?;
    m.add_class::<Trace>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_one, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_two, m)?)?;
    m.add(
        "BUILTIN_WORLDS",
        simworld::builtin_names().collect::<Vec<_>>(),
    )?;
    Ok(())
}
