//! One JSON document configures every subcommand. Each section is optional
//! and falls back to its documented default, so an empty object `{}` is a
//! complete, valid configuration. Unknown keys are rejected: a typo should
//! fail loudly, not silently run the default experiment.

use std::fs;
use std::path::Path;

use eend_core::encoder::EncoderConfig;
use eend_core::error::{Error, Result};
use eend_core::scoring::DEFAULT_COLLAR;
use eend_core::simulator::SimConfig;
use eend_core::training::{EvalConfig, TrainConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub n_mels: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { n_mels: 23 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreConfig {
    /// Posterior threshold for the speech decision.
    pub threshold: f64,
    /// Median-smoothing window in output frames; must be odd.
    pub median_window: usize,
    /// No-score margin around reference boundaries, seconds.
    pub collar: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig { threshold: 0.5, median_window: 11, collar: DEFAULT_COLLAR }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::config(format!(
                "score: threshold must be in (0, 1), got {}",
                self.threshold
            )));
        }
        if self.median_window == 0 || self.median_window % 2 == 0 {
            return Err(Error::config(format!(
                "score: median_window must be odd, got {}",
                self.median_window
            )));
        }
        if !(self.collar >= 0.0 && self.collar.is_finite()) {
            return Err(Error::config(format!("score: collar must be >= 0, got {}", self.collar)));
        }
        Ok(())
    }

    pub fn eval(&self) -> EvalConfig {
        EvalConfig {
            threshold: self.threshold,
            median_window: self.median_window,
            collar: self.collar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// When set (or given as `--seed`), overrides both `train.seed` and
    /// `sim.seed` so one knob pins the whole pipeline.
    pub seed: Option<u64>,
    pub feature: FeatureConfig,
    pub encoder: EncoderConfig,
    pub train: TrainConfig,
    pub sim: SimConfig,
    pub score: ScoreConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature.n_mels == 0 {
            return Err(Error::config("feature: n_mels must be >= 1"));
        }
        self.encoder.validate()?;
        self.train.validate()?;
        self.sim.validate()?;
        self.score.validate()
    }
}

/// Loads the configuration (defaults when no file is given), applies the
/// seed override, and propagates the top-level seed into the sections.
pub fn load(path: Option<&Path>, seed_flag: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Error::config(format!("config {}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if seed_flag.is_some() {
        cfg.seed = seed_flag;
    }
    if let Some(seed) = cfg.seed {
        cfg.train.seed = seed;
        cfg.sim.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes the materialized configuration next to the other artifacts, so a
/// run can be reproduced from its own output directory.
pub fn echo(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(cfg)
        .map_err(|e| Error::internal(format!("config echo: {e}")))?;
    text.push('\n');
    fs::write(out_dir.join("config.echo.json"), text)?;
    Ok(())
}
