//! Turn-taking analysis: overlap/silence region extraction from
//! annotations, 1-D earth mover's distance between duration samples, and
//! the exponential-decay similarity score built on it.

mod emd;
mod regions;
mod similarity;

pub use emd::emd_1d;
pub use regions::{extract_regions, region_partition, DurationSample, RegionKind};
pub use similarity::{compare_corpora, similarity, SimilarityReport, DEFAULT_GAMMA};
