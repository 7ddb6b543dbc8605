use crate::annotation::Annotation;
use crate::error::{Error, Result};
use crate::turntaking::region_partition;

/// Corpus-level summary mirroring the usual simulated-corpus table:
/// mixture count, average recording length, pooled overlap ratio, and total
/// audio volume.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub mixtures: usize,
    pub avg_duration_s: f64,
    /// 100 * overlapped-speech time / union-speech time, pooled over the
    /// corpus. Zero when the corpus has no speech at all.
    pub overlap_ratio_pct: f64,
    pub total_duration_h: f64,
}

impl CorpusStats {
    /// Two-line tab-separated table: header, then one row.
    pub fn tsv(&self) -> String {
        format!(
            "mixtures\tavg_duration_s\toverlap_ratio_pct\ttotal_duration_h\n{}\t{:.2}\t{:.1}\t{:.3}\n",
            self.mixtures, self.avg_duration_s, self.overlap_ratio_pct, self.total_duration_h
        )
    }
}

pub fn corpus_stats(annotations: &[Annotation]) -> Result<CorpusStats> {
    if annotations.is_empty() {
        return Err(Error::input("stats: empty corpus"));
    }
    let mut total = 0.0;
    let mut overlap = 0.0;
    let mut speech = 0.0;
    for ann in annotations {
        total += ann.duration;
        let parts = region_partition(ann)?;
        let o: f64 = parts.overlaps.iter().map(|(s, e)| e - s).sum();
        let x: f64 = parts.exclusive.iter().map(|(s, e)| e - s).sum();
        overlap += o;
        speech += o + x;
    }
    Ok(CorpusStats {
        mixtures: annotations.len(),
        avg_duration_s: total / annotations.len() as f64,
        overlap_ratio_pct: if speech > 0.0 { 100.0 * overlap / speech } else { 0.0 },
        total_duration_h: total / 3600.0,
    })
}
