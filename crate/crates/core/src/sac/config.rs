use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    /// Fixed entropy temperature.
    pub alpha: f64,
    pub tau: f64,
    pub lr: f64,
    pub batch: usize,
    pub updates_per_step: usize,
    pub warmup_steps: u64,
    pub total_steps: u64,
    pub eval_every: u64,
    pub buffer_capacity: usize,
    /// Subtract α·log π(a'|s') inside the bootstrap.
    pub entropy_in_target: bool,
    /// Treat the 800-step time limit as truncation and bootstrap through it.
    pub bootstrap_on_timeout: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            alpha: 0.05,
            tau: 0.005,
            lr: 3e-4,
            batch: 256,
            updates_per_step: 1,
            warmup_steps: 1000,
            total_steps: 50_000,
            eval_every: 5000,
            buffer_capacity: 100_000,
            entropy_in_target: true,
            bootstrap_on_timeout: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("train.gamma must be in [0, 1)");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("train.alpha must be >= 0");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("train.tau must be in (0, 1]");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("train.lr must be > 0");
        }
        if self.batch == 0 || self.buffer_capacity == 0 || self.eval_every == 0 {
            return bad("train.batch, train.buffer_capacity and train.eval_every must be positive");
        }
        Ok(())
    }
}
