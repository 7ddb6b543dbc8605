//! Two-speaker conversation simulator: utterance pools from TSV manifests,
//! exponential-gap mixture layout on the sample grid, reverb/noise
//! augmentation, and corpus summary statistics.

mod augment;
mod mixture;
mod pool;
mod stats;

pub use augment::{add_noise, apply_rir, augment_mixture};
pub use mixture::{corpus_mixture, simulate_mixture, SimConfig};
pub use pool::{build_pool, parse_manifest, PoolEntry, UtterancePool};
pub use stats::{corpus_stats, CorpusStats};
