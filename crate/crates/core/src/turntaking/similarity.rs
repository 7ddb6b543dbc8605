//! Conversational similarity: exp(-gamma * EMD) between duration
//! distributions pooled over two corpora, reported separately for overlap
//! regions and silence regions.

use crate::annotation::Annotation;
use crate::error::{Error, Result};
use crate::turntaking::{emd_1d, extract_regions, DurationSample, RegionKind};

pub const DEFAULT_GAMMA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    pub kind: RegionKind,
    /// Transport cost in seconds.
    pub emd: f64,
    pub gamma: f64,
    /// exp(-gamma * emd), in (0, 1].
    pub similarity: f64,
}

impl SimilarityReport {
    /// `kind<TAB>emd_seconds<TAB>gamma<TAB>similarity`
    pub fn tsv_line(&self) -> String {
        let kind = match self.kind {
            RegionKind::Overlap => "overlap",
            RegionKind::Silence => "silence",
        };
        format!("{kind}\t{}\t{}\t{}\n", self.emd, self.gamma, self.similarity)
    }
}

pub fn similarity(a: &DurationSample, b: &DurationSample, gamma: f64) -> Result<SimilarityReport> {
    if a.kind != b.kind {
        return Err(Error::input(
            "similarity: comparing samples of different region kinds",
        ));
    }
    let emd = emd_1d(a, b)?;
    Ok(SimilarityReport {
        kind: a.kind,
        emd,
        gamma,
        similarity: (-gamma * emd).exp(),
    })
}

/// Pools region durations across each corpus and reports one similarity
/// per region kind: (overlap, silence).
pub fn compare_corpora(
    train: &[Annotation],
    test: &[Annotation],
    gamma: f64,
) -> Result<(SimilarityReport, SimilarityReport)> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::input("compare_corpora: empty corpus"));
    }
    let pool = |annotations: &[Annotation]| -> Result<(DurationSample, DurationSample)> {
        let mut overlaps = DurationSample {
            kind: RegionKind::Overlap,
            durations: Vec::new(),
        };
        let mut silences = DurationSample {
            kind: RegionKind::Silence,
            durations: Vec::new(),
        };
        for a in annotations {
            let (ov, sil) = extract_regions(a)?;
            overlaps.durations.extend(ov.durations);
            silences.durations.extend(sil.durations);
        }
        Ok((overlaps, silences))
    };
    let (train_ov, train_sil) = pool(train)?;
    let (test_ov, test_sil) = pool(test)?;
    Ok((
        similarity(&train_ov, &test_ov, gamma)?,
        similarity(&train_sil, &test_sil, gamma)?,
    ))
}
