//! SpecAugment: random frequency- and time-band masking of a feature
//! matrix during training.
//!
//! PRNG contract (relied on for reproducibility): masks are drawn in a
//! fixed order — all frequency masks first, then all time masks — and
//! every mask consumes exactly two draws, width first, then start:
//!
//! * frequency mask: width w from Uniform{0..=max_freq_width}, then start
//!   from Uniform{0..=F-w};
//! * time mask: width w from Uniform{0..=min(max_time_width, T)}, then
//!   start from Uniform{0..=T-w}.
//!
//! A zero-width mask still consumes its start draw, so the stream position
//! after the call depends only on the mask counts.

use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::numerics::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpecAugmentConfig {
    pub n_freq_masks: usize,
    /// Maximum masked Mel channels per frequency mask.
    pub max_freq_width: usize,
    pub n_time_masks: usize,
    /// Maximum masked frames per time mask.
    pub max_time_width: usize,
}

impl Default for SpecAugmentConfig {
    fn default() -> Self {
        SpecAugmentConfig {
            n_freq_masks: 2,
            max_freq_width: 2,
            n_time_masks: 2,
            max_time_width: 1200,
        }
    }
}

/// Masked cells are set to 0; unmasked cells are untouched (bitwise).
pub fn spec_augment(f: &FeatureMatrix, cfg: &SpecAugmentConfig, rng: &mut Rng) -> FeatureMatrix {
    let (t_len, n_mels) = (f.frames(), f.dims());
    let mut out = f.clone();
    for _ in 0..cfg.n_freq_masks {
        let w = rng.uniform_usize(cfg.max_freq_width.min(n_mels) + 1);
        let start = rng.uniform_usize(n_mels - w + 1);
        for t in 0..t_len {
            for m in start..start + w {
                out.data.set(t, m, 0.0);
            }
        }
    }
    for _ in 0..cfg.n_time_masks {
        let w = rng.uniform_usize(cfg.max_time_width.min(t_len) + 1);
        let start = rng.uniform_usize(t_len - w + 1);
        for t in start..start + w {
            for m in 0..n_mels {
                out.data.set(t, m, 0.0);
            }
        }
    }
    out
}
