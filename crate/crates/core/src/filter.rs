//! The habituating novelty filter: a SOM whose neurons each feed the output
//! neuron through a habituable synapse.
//!
//! On every learning presentation the winner's synapse habituates with the
//! short time constant, the rest of its lattice neighbourhood with the medium
//! one, and every other synapse recovers toward rest with the long one. The
//! novelty score is the winner's efficacy after that update.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{check_dim, Error, Result};
use crate::habituation::{integrate, HabituationParams, DEFAULT_ALPHA, DEFAULT_RESTING_EFFICACY};
use crate::som::{NeuronId, SomConfig, SomGrid};

/// How the winner's distance is turned into a synaptic stimulus.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusScale {
    /// Every firing neighbourhood member receives `S = 1`.
    #[default]
    Unit,
    /// `S = min(d, 1)`.
    Clamp1,
    /// `S = d`.
    Raw,
    /// Every firing neighbourhood member receives the given constant.
    Fixed(f64),
}

impl StimulusScale {
    pub fn stimulus(self, distance: f64) -> f64 {
        match self {
            StimulusScale::Unit => 1.0,
            StimulusScale::Clamp1 => distance.min(1.0),
            StimulusScale::Raw => distance,
            StimulusScale::Fixed(s) => s,
        }
    }
}

impl std::str::FromStr for StimulusScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Self::Unit),
            "clamp1" => Ok(Self::Clamp1),
            "raw" => Ok(Self::Raw),
            other if other.starts_with("fixed:") => other[6..]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .map(Self::Fixed)
                .ok_or_else(|| Error::InvalidParameter(format!("bad fixed stimulus {other:?}"))),
            other => Err(Error::InvalidParameter(format!(
                "unknown stimulus scale {other:?} (expected unit, clamp1, raw or fixed:<value>)"
            ))),
        }
    }
}

impl std::fmt::Display for StimulusScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StimulusScale::Unit => f.write_str("unit"),
            StimulusScale::Clamp1 => f.write_str("clamp1"),
            StimulusScale::Raw => f.write_str("raw"),
            StimulusScale::Fixed(s) => write!(f, "fixed:{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub som: SomConfig,
    pub alpha: f64,
    pub y0: f64,
    pub tau_winner: f64,
    pub tau_neighbour: f64,
    pub tau_forget: f64,
    pub forgetting_enabled: bool,
    pub stimulus_scale: StimulusScale,
    /// Keep efficacies at or above zero.
    pub clamp_at_zero: bool,
    pub readout: Readout,
}

/// Which efficacy a learning presentation reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// The winner's efficacy after this presentation's synapse update.
    #[default]
    PostUpdate,
    /// The winner's efficacy before it is updated.
    PreUpdate,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            som: SomConfig::default(),
            alpha: DEFAULT_ALPHA,
            y0: DEFAULT_RESTING_EFFICACY,
            tau_winner: 3.33,
            tau_neighbour: 14.33,
            tau_forget: 100.0,
            forgetting_enabled: true,
            stimulus_scale: StimulusScale::default(),
            clamp_at_zero: true,
            readout: Readout::default(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        self.som.validate()?;
        for tau in [self.tau_winner, self.tau_neighbour, self.tau_forget] {
            HabituationParams::new(self.alpha, self.y0, tau)?;
        }
        Ok(())
    }

    pub fn winner_params(&self) -> HabituationParams {
        self.params(self.tau_winner)
    }

    pub fn neighbour_params(&self) -> HabituationParams {
        self.params(self.tau_neighbour)
    }

    pub fn forget_params(&self) -> HabituationParams {
        self.params(self.tau_forget)
    }

    fn params(&self, tau: f64) -> HabituationParams {
        HabituationParams {
            alpha: self.alpha,
            y0: self.y0,
            tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoveltyReading {
    pub winner: NeuronId,
    pub distance: f64,
    pub novelty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoveltyFilter {
    config: FilterConfig,
    grid: SomGrid,
    efficacies: Vec<f64>,
    learning_enabled: bool,
    seed: u64,
}

impl NoveltyFilter {
    /// Randomly initialised filter with every synapse at rest.
    pub fn new(config: FilterConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let grid = SomGrid::random(config.som, seed)?;
        Self::from_parts(config, grid, None, true, seed)
    }

    /// Assembles a filter from existing state. `efficacies` defaults to rest.
    pub fn from_parts(
        config: FilterConfig,
        grid: SomGrid,
        efficacies: Option<Vec<f64>>,
        learning_enabled: bool,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if *grid.config() != config.som {
            return Err(Error::InvalidParameter(
                "grid configuration differs from filter configuration".into(),
            ));
        }
        let efficacies = match efficacies {
            Some(e) => {
                check_dim(grid.len(), e.len())?;
                e
            }
            None => vec![config.y0; grid.len()],
        };
        Ok(Self {
            config,
            grid,
            efficacies,
            learning_enabled,
            seed,
        })
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn grid(&self) -> &SomGrid {
        &self.grid
    }

    pub fn efficacies(&self) -> &[f64] {
        &self.efficacies
    }

    pub fn efficacy(&self, neuron: NeuronId) -> f64 {
        self.efficacies[neuron.index()]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn learning_enabled(&self) -> bool {
        self.learning_enabled
    }

    /// Switches weight adaptation and all synapse updates on or off together.
    pub fn set_learning(&mut self, enabled: bool) {
        self.learning_enabled = enabled;
    }

    pub fn forgetting_enabled(&self) -> bool {
        self.config.forgetting_enabled
    }

    pub fn set_forgetting(&mut self, enabled: bool) {
        self.config.forgetting_enabled = enabled;
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        check_dim(self.grid.input_dim(), input.len())?;
        match input.iter().position(|v| !(0.0..=1.0).contains(v)) {
            Some(index) => Err(Error::InputOutOfRange {
                index,
                value: input[index],
            }),
            None => Ok(()),
        }
    }

    /// Scores `input` against the current state without changing anything.
    pub fn evaluate(&self, input: &[f64]) -> Result<NoveltyReading> {
        self.check_input(input)?;
        let (winner, distance) = self.grid.find_winner(input)?;
        Ok(NoveltyReading {
            winner,
            distance,
            novelty: self.efficacies[winner.index()],
        })
    }

    /// Classifies `input` and, when learning, adapts weights and synapses.
    pub fn present(&mut self, input: &[f64]) -> Result<NoveltyReading> {
        let reading = self.evaluate(input)?;
        if !self.learning_enabled {
            return Ok(reading);
        }
        let winner = reading.winner;
        self.grid.update_weights(winner, input)?;

        let stimulus = self.config.stimulus_scale.stimulus(reading.distance);
        let winner_p = self.config.winner_params();
        let neighbour_p = self.config.neighbour_params();
        let forget_p = self.config.forget_params();
        for i in 0..self.efficacies.len() {
            let neuron = NeuronId(i);
            let (params, s) = if neuron == winner {
                (&winner_p, stimulus)
            } else if self.grid.is_neighbour(winner, neuron) {
                (&neighbour_p, stimulus)
            } else if self.config.forgetting_enabled {
                (&forget_p, 0.0)
            } else {
                continue;
            };
            let mut y = integrate(params, self.efficacies[i], s, 1.0)?;
            if self.config.clamp_at_zero {
                y = y.max(0.0);
            }
            self.efficacies[i] = y;
        }
        Ok(match self.config.readout {
            Readout::PostUpdate => NoveltyReading {
                novelty: self.efficacies[winner.index()],
                ..reading
            },
            Readout::PreUpdate => reading,
        })
    }

    /// Presents every scan in order.
    pub fn novelty_trace<I, S>(&mut self, scans: I) -> Result<Vec<NoveltyReading>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[f64]>,
    {
        scans
            .into_iter()
            .map(|s| self.present(s.as_ref()))
            .collect()
    }

    /// SHA-256 over configuration, weights, efficacies and the learning flag.
    pub fn state_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.config).expect("config serialises"));
        h.update(self.seed.to_le_bytes());
        h.update([self.learning_enabled as u8]);
        for w in self.grid.all_weights() {
            h.update(w.to_bits().to_le_bytes());
        }
        for y in &self.efficacies {
            h.update(y.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
