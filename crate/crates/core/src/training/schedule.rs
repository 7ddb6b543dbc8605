use crate::error::{Error, Result};
use crate::training::config::{Schedule, TrainConfig};

/// Warmup-then-decay learning rate: `scale * d_model^-0.5 * min(step^-0.5,
/// step * warmup^-1.5)`. Rises linearly for `warmup` steps, then decays as
/// the inverse square root of the step count.
pub fn noam_lr(step: usize, d_model: usize, warmup: usize, scale: f64) -> Result<f64> {
    if step == 0 {
        return Err(Error::input("noam_lr: step counts from 1"));
    }
    if d_model == 0 {
        return Err(Error::config("noam_lr: d_model must be >= 1"));
    }
    if warmup == 0 {
        return Err(Error::config("noam_lr: warmup must be >= 1"));
    }
    let s = step as f64;
    let w = warmup as f64;
    Ok(scale * (d_model as f64).powf(-0.5) * s.powf(-0.5).min(s * w.powf(-1.5)))
}

/// Learning rate in effect at `step` (1-based) under the configured schedule.
pub fn effective_lr(cfg: &TrainConfig, d_model: usize, step: usize) -> Result<f64> {
    match cfg.schedule {
        Schedule::Noam => noam_lr(step, d_model, cfg.warmup_steps, cfg.lr),
        Schedule::Fixed => Ok(cfg.lr),
    }
}
