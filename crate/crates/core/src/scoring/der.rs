//! Diarization error rate on a 1 ms evaluation grid.
//!
//! Grid convention: cell i covers [i, i+1) ms and is classified at its
//! center t = (i + 0.5) ms; a speaker is active when some segment has
//! start <= t < end. Cells whose center falls within `collar` seconds of
//! any reference segment boundary are excluded from scoring entirely.
//! Overlapped speech is scored: a cell with two reference speakers
//! contributes two cells of scored speech.
//!
//! Speaker mapping maximizes total mapped ref/hyp co-active time over the
//! scored cells — exhaustively when both sides have at most 3 speakers,
//! via the assignment solver otherwise. Time components are kept as
//! integer cell counts until the final division, so hand-derived examples
//! come out exact.

use std::collections::BTreeMap;

use crate::annotation::Annotation;
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scoring::hungarian::max_agreement_assignment;

pub const DEFAULT_COLLAR: f64 = 0.25;
const CELL: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct DERReport {
    /// Reference speech time over scored cells (speaker-seconds).
    pub scored_speech: f64,
    pub missed: f64,
    pub false_alarm: f64,
    pub confusion: f64,
    /// 100 * (missed + false_alarm + confusion) / scored_speech.
    pub der: f64,
    /// (reference speaker, hypothesis speaker) pairs actually used.
    pub mapping: Vec<(String, String)>,
}

impl DERReport {
    /// `recording<TAB>scored<TAB>miss<TAB>fa<TAB>conf<TAB>der`
    pub fn tsv_line(&self, recording: &str) -> String {
        format!(
            "{recording}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\n",
            self.scored_speech, self.missed, self.false_alarm, self.confusion, self.der
        )
    }
}

/// Active-speaker index sets per grid cell for one annotation.
fn rasterize(a: &Annotation, speakers: &[&str], n_cells: usize) -> Vec<u64> {
    assert!(speakers.len() <= 64, "more than 64 speakers in one recording");
    let mut mask = vec![0u64; n_cells];
    for seg in &a.segments {
        let s = speakers.iter().position(|&n| n == seg.speaker).unwrap();
        for (i, m) in mask.iter_mut().enumerate() {
            let t = (i as f64 + 0.5) * CELL;
            if seg.start <= t && t < seg.end {
                *m |= 1 << s;
            }
        }
    }
    mask
}

/// Lexicographically-first injective row-to-column map maximizing total
/// agreement; rows and columns both at most 3.
fn exhaustive_mapping(agreement: &Matrix) -> Vec<Option<usize>> {
    let (r, h) = (agreement.rows(), agreement.cols());
    let mut best_score = -1.0f64;
    let mut best = vec![None; r];
    let mut current: Vec<Option<usize>> = vec![None; r];
    let mut used = vec![false; h];
    fn rec(
        row: usize,
        agreement: &Matrix,
        used: &mut Vec<bool>,
        current: &mut Vec<Option<usize>>,
        best_score: &mut f64,
        best: &mut Vec<Option<usize>>,
    ) {
        let (r, h) = (agreement.rows(), agreement.cols());
        if row == r {
            let score: f64 = current
                .iter()
                .enumerate()
                .filter_map(|(i, &j)| j.map(|j| agreement.get(i, j)))
                .sum();
            if score > *best_score {
                *best_score = score;
                best.clone_from(current);
            }
            return;
        }
        current[row] = None;
        rec(row + 1, agreement, used, current, best_score, best);
        for j in 0..h {
            if !used[j] {
                used[j] = true;
                current[row] = Some(j);
                rec(row + 1, agreement, used, current, best_score, best);
                current[row] = None;
                used[j] = false;
            }
        }
    }
    rec(0, agreement, &mut used, &mut current, &mut best_score, &mut best);
    best
}

pub fn der(reference: &Annotation, hypothesis: &Annotation, collar: f64) -> Result<DERReport> {
    if collar < 0.0 || !collar.is_finite() {
        return Err(Error::config(format!("der: collar {collar} must be >= 0")));
    }
    reference.validate()?;
    hypothesis.validate()?;

    let ref_speakers = reference.speakers();
    let hyp_speakers = hypothesis.speakers();
    let end = reference
        .duration
        .max(hypothesis.duration)
        .max(collar + CELL);
    let n_cells = (end / CELL).ceil() as usize;

    let ref_mask = rasterize(reference, &ref_speakers, n_cells);
    let hyp_mask = rasterize(hypothesis, &hyp_speakers, n_cells);

    let mut boundaries: Vec<f64> = Vec::with_capacity(2 * reference.segments.len());
    for seg in &reference.segments {
        boundaries.push(seg.start);
        boundaries.push(seg.end);
    }
    let scored: Vec<bool> = (0..n_cells)
        .map(|i| {
            let t = (i as f64 + 0.5) * CELL;
            !boundaries.iter().any(|&b| t >= b - collar && t <= b + collar)
        })
        .collect();

    // Pass 1: cell-count components and the ref x hyp co-activity matrix.
    let (nr_spk, nh_spk) = (ref_speakers.len(), hyp_speakers.len());
    let mut agreement_cells = vec![vec![0u64; nh_spk]; nr_spk];
    let (mut scored_cells, mut miss_cells, mut fa_cells, mut min_cells) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n_cells {
        if !scored[i] {
            continue;
        }
        let (rm, hm) = (ref_mask[i], hyp_mask[i]);
        let nr = rm.count_ones() as u64;
        let nh = hm.count_ones() as u64;
        scored_cells += nr;
        miss_cells += nr.saturating_sub(nh);
        fa_cells += nh.saturating_sub(nr);
        min_cells += nr.min(nh);
        if rm != 0 && hm != 0 {
            for (r, row) in agreement_cells.iter_mut().enumerate() {
                if rm & (1 << r) != 0 {
                    for (h, cell) in row.iter_mut().enumerate() {
                        if hm & (1 << h) != 0 {
                            *cell += 1;
                        }
                    }
                }
            }
        }
    }

    let agreement = Matrix::from_fn(nr_spk, nh_spk, |r, h| agreement_cells[r][h] as f64);
    let mapping_idx = if nr_spk <= 3 && nh_spk <= 3 {
        exhaustive_mapping(&agreement)
    } else {
        max_agreement_assignment(&agreement)?
    };

    let correct_cells: u64 = mapping_idx
        .iter()
        .enumerate()
        .filter_map(|(r, &h)| h.map(|h| agreement_cells[r][h]))
        .sum();
    let conf_cells = min_cells - correct_cells;

    let to_seconds = |c: u64| c as f64 / 1000.0;
    let scored_speech = to_seconds(scored_cells);
    let missed = to_seconds(miss_cells);
    let false_alarm = to_seconds(fa_cells);
    let confusion = to_seconds(conf_cells);
    let errors = missed + false_alarm + confusion;
    let der = if scored_speech > 0.0 {
        100.0 * errors / scored_speech
    } else if errors > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(DERReport {
        scored_speech,
        missed,
        false_alarm,
        confusion,
        der,
        mapping: mapping_idx
            .iter()
            .enumerate()
            .filter_map(|(r, &h)| {
                h.map(|h| (ref_speakers[r].to_string(), hyp_speakers[h].to_string()))
            })
            .collect(),
    })
}

/// Scores every shared recording and pools components by summation (the
/// pooled DER is NOT the mean of per-recording DERs).
pub fn score_corpus(
    references: &BTreeMap<String, Annotation>,
    hypotheses: &BTreeMap<String, Annotation>,
    collar: f64,
    allow_missing: bool,
) -> Result<(Vec<(String, DERReport)>, DERReport)> {
    if !allow_missing {
        for id in references.keys() {
            if !hypotheses.contains_key(id) {
                return Err(Error::input(format!("score_corpus: no hypothesis for {id}")));
            }
        }
        for id in hypotheses.keys() {
            if !references.contains_key(id) {
                return Err(Error::input(format!("score_corpus: no reference for {id}")));
            }
        }
    }
    let mut per_recording = Vec::new();
    for (id, r) in references {
        if let Some(h) = hypotheses.get(id) {
            per_recording.push((id.clone(), der(r, h, collar)?));
        }
    }
    if per_recording.is_empty() {
        return Err(Error::input("score_corpus: no common recordings"));
    }
    let sum = |f: fn(&DERReport) -> f64| per_recording.iter().map(|(_, r)| f(r)).sum::<f64>();
    let scored_speech = sum(|r| r.scored_speech);
    let missed = sum(|r| r.missed);
    let false_alarm = sum(|r| r.false_alarm);
    let confusion = sum(|r| r.confusion);
    let errors = missed + false_alarm + confusion;
    let pooled = DERReport {
        scored_speech,
        missed,
        false_alarm,
        confusion,
        der: if scored_speech > 0.0 {
            100.0 * errors / scored_speech
        } else if errors > 0.0 {
            f64::INFINITY
        } else {
            0.0
        },
        mapping: Vec::new(),
    };
    Ok((per_recording, pooled))
}
