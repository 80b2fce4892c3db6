//! Self-organising map used as an online vector quantiser.
//!
//! Each neuron on a rectangular lattice carries a weight vector. An input is
//! classified by the neuron with the smallest squared Euclidean distance, and
//! learning pulls that winner and its lattice neighbours a fixed fraction of
//! the way toward the input. Learning rate and neighbourhood radius never
//! change over time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Flat index of a neuron in row-major lattice order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NeuronId(pub usize);

impl NeuronId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for NeuronId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SomConfig {
    pub width: usize,
    pub height: usize,
    pub input_dim: usize,
    pub learning_rate: f64,
    /// Chebyshev radius on the lattice.
    pub neighbourhood_radius: usize,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self {
            width: 10,
            height: 10,
            input_dim: 16,
            learning_rate: 0.25,
            neighbourhood_radius: 1,
        }
    }
}

impl SomConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        if self.input_dim == 0 {
            return Err(Error::InvalidParameter("input_dim must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must lie in [0, 1], got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomGrid {
    config: SomConfig,
    /// Row-major, `input_dim` values per neuron.
    weights: Vec<f64>,
}

impl SomGrid {
    /// Grid with every weight component drawn uniformly from `[0, 1)`.
    pub fn random(config: SomConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = config.width * config.height * config.input_dim;
        let weights = (0..n).map(|_| rng.random::<f64>()).collect();
        Ok(Self { config, weights })
    }

    /// Grid from explicit per-neuron weight vectors in row-major order.
    pub fn from_weights(config: SomConfig, neurons: Vec<Vec<f64>>) -> Result<Self> {
        config.validate()?;
        check_dim(config.width * config.height, neurons.len())?;
        let mut weights = Vec::with_capacity(neurons.len() * config.input_dim);
        for w in &neurons {
            check_dim(config.input_dim, w.len())?;
            if let Some(bad) = w.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("non-finite weight {bad}")));
            }
            weights.extend_from_slice(w);
        }
        Ok(Self { config, weights })
    }

    pub fn config(&self) -> &SomConfig {
        &self.config
    }

    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn height(&self) -> usize {
        self.config.height
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn learning_rate(&self) -> f64 {
        self.config.learning_rate
    }

    pub fn len(&self) -> usize {
        self.config.width * self.config.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neuron(&self, index: usize) -> Result<NeuronId> {
        if index < self.len() {
            Ok(NeuronId(index))
        } else {
            Err(Error::InvalidNeuron {
                index,
                size: self.len(),
            })
        }
    }

    /// Lattice coordinates `(column, row)` of a neuron.
    pub fn coords(&self, neuron: NeuronId) -> (usize, usize) {
        (neuron.0 % self.config.width, neuron.0 / self.config.width)
    }

    pub fn weights(&self, neuron: NeuronId) -> &[f64] {
        let d = self.config.input_dim;
        &self.weights[neuron.0 * d..(neuron.0 + 1) * d]
    }

    pub fn all_weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_neuron(&self, neuron: NeuronId) -> Result<()> {
        self.neuron(neuron.0).map(|_| ())
    }

    /// Sum of squared component differences between a neuron's weights and
    /// the input. No square root is taken.
    pub fn distance(&self, neuron: NeuronId, input: &[f64]) -> Result<f64> {
        self.check_neuron(neuron)?;
        check_dim(self.config.input_dim, input.len())?;
        Ok(squared_distance(self.weights(neuron), input))
    }

    /// Neuron with the minimum distance to `input`. Ties go to the lowest
    /// flat index.
    pub fn find_winner(&self, input: &[f64]) -> Result<(NeuronId, f64)> {
        check_dim(self.config.input_dim, input.len())?;
        let mut best = (NeuronId(0), f64::INFINITY);
        for (i, w) in self.weights.chunks_exact(self.config.input_dim).enumerate() {
            let d = squared_distance(w, input);
            if d < best.1 {
                best = (NeuronId(i), d);
            }
        }
        Ok(best)
    }

    /// The winner plus every neuron within the Chebyshev radius, clipped at
    /// the lattice edges. Returned in ascending index order.
    pub fn neighbourhood(&self, winner: NeuronId) -> Result<Vec<NeuronId>> {
        self.check_neuron(winner)?;
        let r = self.config.neighbourhood_radius;
        let (cx, cy) = self.coords(winner);
        let (w, h) = (self.config.width, self.config.height);
        let mut out = Vec::with_capacity((2 * r + 1).pow(2));
        for y in cy.saturating_sub(r)..=(cy + r).min(h - 1) {
            for x in cx.saturating_sub(r)..=(cx + r).min(w - 1) {
                out.push(NeuronId(y * w + x));
            }
        }
        Ok(out)
    }

    pub fn is_neighbour(&self, winner: NeuronId, other: NeuronId) -> bool {
        let (ax, ay) = self.coords(winner);
        let (bx, by) = self.coords(other);
        ax.abs_diff(bx).max(ay.abs_diff(by)) <= self.config.neighbourhood_radius
    }

    /// Moves every neighbourhood member a fraction `learning_rate` of the way
    /// toward `input`. Returns the members that were updated.
    pub fn update_weights(&mut self, winner: NeuronId, input: &[f64]) -> Result<Vec<NeuronId>> {
        check_dim(self.config.input_dim, input.len())?;
        let members = self.neighbourhood(winner)?;
        let eta = self.config.learning_rate;
        let d = self.config.input_dim;
        for m in &members {
            let w = &mut self.weights[m.0 * d..(m.0 + 1) * d];
            // convex form: exact at eta = 0 and eta = 1, never leaves the hull
            for (wi, &vi) in w.iter_mut().zip(input) {
                *wi = (1.0 - eta) * *wi + eta * vi;
            }
        }
        Ok(members)
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
