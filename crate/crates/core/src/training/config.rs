use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Inverse-square-root decay with linear warmup; `lr` is the overall
    /// scale applied on top of the d_model^-1/2 factor.
    Noam,
    /// Constant learning rate `lr` at every step.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub schedule: Schedule,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub warmup_steps: usize,
    pub batch_size: usize,
    pub epochs: usize,
    /// How many trailing per-epoch checkpoints to average into the final model.
    pub average_last: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Adam,
            schedule: Schedule::Noam,
            lr: 1.0,
            beta1: 0.9,
            beta2: 0.98,
            eps: 1e-9,
            momentum: 0.0,
            weight_decay: 0.0,
            warmup_steps: 25_000,
            batch_size: 64,
            epochs: 100,
            average_last: 10,
            seed: 1,
        }
    }
}

impl TrainConfig {
    /// Constant-rate Adam, as used for adaptation runs.
    pub fn adam_fixed(lr: f64) -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Adam,
            schedule: Schedule::Fixed,
            lr,
            ..TrainConfig::default()
        }
    }

    /// Constant-rate SGD with momentum and L2 weight decay.
    pub fn sgd_fixed(lr: f64, momentum: f64, weight_decay: f64) -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Sgd,
            schedule: Schedule::Fixed,
            lr,
            momentum,
            weight_decay,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        // lr == 0 is deliberately legal: a zero-rate run is the cheapest way
        // to exercise the full loop while provably leaving parameters alone.
        if !self.lr.is_finite() || self.lr < 0.0 {
            return Err(Error::config(format!(
                "train: lr must be finite and >= 0, got {}",
                self.lr
            )));
        }
        if self.warmup_steps == 0 {
            return Err(Error::config("train: warmup_steps must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("train: batch_size must be >= 1"));
        }
        if self.average_last == 0 {
            return Err(Error::config("train: average_last must be >= 1"));
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2), ("momentum", self.momentum)]
        {
            if !v.is_finite() || !(0.0..1.0).contains(&v) {
                return Err(Error::config(format!(
                    "train: {name} must lie in [0, 1), got {v}"
                )));
            }
        }
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(Error::config(format!("train: eps must be > 0, got {}", self.eps)));
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return Err(Error::config(format!(
                "train: weight_decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}
