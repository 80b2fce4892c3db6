//! Habituable synapse dynamics.
//!
//! Efficacy `y` follows `tau * dy/dt = alpha * (y0 - y) - S`. Each call to
//! [`integrate`] advances `y` with the exact solution for a stimulus held
//! constant over the step, so any step size is stable and consecutive steps
//! compose exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 1.05;
pub const DEFAULT_RESTING_EFFICACY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HabituationParams {
    /// Recovery-rate constant.
    pub alpha: f64,
    /// Resting (initial) efficacy.
    pub y0: f64,
    /// Time constant, in presentations.
    pub tau: f64,
}

impl HabituationParams {
    pub fn new(alpha: f64, y0: f64, tau: f64) -> Result<Self> {
        let params = Self { alpha, y0, tau };
        params.validate()?;
        Ok(params)
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.alpha, self.y0, tau)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("y0", self.y0), ("tau", self.tau)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Fixed point `y0 - S / alpha` for a constant stimulus.
    pub fn steady_state(&self, stimulus: f64) -> f64 {
        self.y0 - stimulus / self.alpha
    }

    /// Per-step contraction factor `exp(-alpha * dt / tau)`.
    pub fn decay_factor(&self, dt: f64) -> f64 {
        (-self.alpha * dt / self.tau).exp()
    }
}

impl Default for HabituationParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            y0: DEFAULT_RESTING_EFFICACY,
            tau: 1.0,
        }
    }
}

/// Exact solution of the efficacy ODE over `dt` with `stimulus` held fixed.
pub fn integrate(params: &HabituationParams, efficacy: f64, stimulus: f64, dt: f64) -> Result<f64> {
    if !(stimulus >= 0.0 && stimulus.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "stimulus must be finite and non-negative, got {stimulus}"
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time step must be finite and positive, got {dt}"
        )));
    }
    let target = params.steady_state(stimulus);
    Ok(target + (efficacy - target) * params.decay_factor(dt))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    efficacy: f64,
    params: HabituationParams,
}

impl Synapse {
    /// A synapse at its resting efficacy.
    pub fn new(params: HabituationParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            efficacy: params.y0,
            params,
        })
    }

    pub fn efficacy(&self) -> f64 {
        self.efficacy
    }

    pub fn params(&self) -> &HabituationParams {
        &self.params
    }

    pub fn set_efficacy(&mut self, efficacy: f64) {
        self.efficacy = efficacy;
    }

    pub fn step(&mut self, stimulus: f64, dt: f64) -> Result<f64> {
        self.efficacy = integrate(&self.params, self.efficacy, stimulus, dt)?;
        Ok(self.efficacy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(tau: f64) -> HabituationParams {
        HabituationParams::new(1.05, 1.0, tau).unwrap()
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let mut s = Synapse::new(params(3.33)).unwrap();
        for _ in 0..10 {
            assert_eq!(s.step(0.0, 1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn fast_habituation_within_five_steps() {
        let mut s = Synapse::new(params(3.33)).unwrap();
        for _ in 0..5 {
            s.step(1.0, 1.0).unwrap();
        }
        assert!(s.efficacy() < 0.9);
    }

    #[test]
    fn slow_recovery_from_zero() {
        let mut s = Synapse::new(params(100.0)).unwrap();
        s.set_efficacy(0.0);
        for _ in 0..280 {
            s.step(0.0, 1.0).unwrap();
        }
        let expected = 1.0 - (-1.05_f64 * 280.0 / 100.0).exp();
        assert!((s.efficacy() - expected).abs() < 1e-12);
        assert!((s.efficacy() - 0.947).abs() < 1e-3);
    }

    #[test]
    fn steady_state_values() {
        let p = params(3.33);
        assert_eq!(p.steady_state(0.0), 1.0);
        assert!((p.steady_state(1.0) - 0.047_619_047_619).abs() < 1e-11);
        assert!(p.steady_state(1.05 * 1.0).abs() < 1e-15);
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let p = params(3.33);
        assert!(integrate(&p, 1.0, -0.1, 1.0).is_err());
        assert!(integrate(&p, 1.0, 0.5, 0.0).is_err());
        assert!(integrate(&p, 1.0, 0.5, -1.0).is_err());
        assert!(integrate(&p, 1.0, f64::NAN, 1.0).is_err());
        assert!(HabituationParams::new(0.0, 1.0, 1.0).is_err());
        assert!(HabituationParams::new(1.0, 1.0, -3.0).is_err());
        assert!(HabituationParams::new(1.0, 0.0, 3.0).is_err());
    }

    #[test]
    fn smaller_tau_decays_faster() {
        let run = |tau| {
            let mut s = Synapse::new(params(tau)).unwrap();
            (0..5).for_each(|_| {
                s.step(1.0, 1.0).unwrap();
            });
            s.efficacy()
        };
        assert!(run(3.33) < run(14.33));
        assert!(run(14.33) < run(100.0));
    }

    #[test]
    fn decay_ratio_is_geometric() {
        let p = params(14.33);
        let target = p.steady_state(0.5);
        let mut s = Synapse::new(p).unwrap();
        let mut prev = s.efficacy() - target;
        for _ in 0..20 {
            s.step(0.5, 1.0).unwrap();
            let gap = s.efficacy() - target;
            assert!((gap / prev - p.decay_factor(1.0)).abs() < 1e-9);
            prev = gap;
        }
    }
}
