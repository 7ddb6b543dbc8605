//! Maximal overlap / exclusive-speech / silence intervals of a recording,
//! by exact interval sweep over segment boundaries.

use crate::annotation::Annotation;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Overlap,
    Silence,
}

/// Lengths (seconds) of the maximal regions of one kind, one entry per
/// region. Zero-length regions are never emitted.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationSample {
    pub kind: RegionKind,
    pub durations: Vec<f64>,
}

/// The recording timeline split into maximal constant-class intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegionPartition {
    /// >= 2 speakers active.
    pub overlaps: Vec<(f64, f64)>,
    /// Exactly 1 speaker active.
    pub exclusive: Vec<(f64, f64)>,
    /// Nobody active.
    pub silences: Vec<(f64, f64)>,
}

/// Merged, sorted intervals of one speaker; abutting segments coalesce.
fn merge_speaker(intervals: &mut Vec<(f64, f64)>) {
    intervals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for &(s, e) in intervals.iter() {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    *intervals = merged;
}

/// Sweep the annotation into maximal intervals labelled by how many
/// speakers are active. Within one speaker, overlapping segments count
/// once (they are merged first).
pub fn region_partition(a: &Annotation) -> Result<RegionPartition> {
    a.validate()?;
    let mut per_speaker: Vec<Vec<(f64, f64)>> = Vec::new();
    {
        let mut names: Vec<&str> = Vec::new();
        for seg in &a.segments {
            let idx = match names.iter().position(|&n| n == seg.speaker) {
                Some(i) => i,
                None => {
                    names.push(&seg.speaker);
                    per_speaker.push(Vec::new());
                    names.len() - 1
                }
            };
            if seg.end > seg.start {
                per_speaker[idx].push((seg.start, seg.end));
            }
        }
    }
    // +1 at each merged start, -1 at each merged end.
    let mut events: Vec<(f64, i32)> = Vec::new();
    for intervals in per_speaker.iter_mut() {
        merge_speaker(intervals);
        for &(s, e) in intervals.iter() {
            events.push((s, 1));
            events.push((e, -1));
        }
    }
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut out = RegionPartition::default();
    let mut push = |count: i32, start: f64, end: f64| {
        if end > start {
            let bucket = match count {
                0 => &mut out.silences,
                1 => &mut out.exclusive,
                _ => &mut out.overlaps,
            };
            bucket.push((start, end));
        }
    };

    let mut count = 0i32;
    let mut cursor = 0.0;
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        push(count, cursor, t.min(a.duration));
        while i < events.len() && events[i].0 == t {
            count += events[i].1;
            i += 1;
        }
        cursor = t;
    }
    push(count, cursor, a.duration);

    // Coalesce abutting same-class intervals (distinct event times that did
    // not change the class, e.g. 2 -> 3 speakers stays "overlap").
    for list in [&mut out.overlaps, &mut out.exclusive, &mut out.silences] {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(list.len());
        for &(s, e) in list.iter() {
            match merged.last_mut() {
                Some(last) if s == last.1 => last.1 = e,
                _ => merged.push((s, e)),
            }
        }
        *list = merged;
    }
    Ok(out)
}

/// Overlap and silence duration samples of one recording: each maximal
/// region contributes its length once.
pub fn extract_regions(a: &Annotation) -> Result<(DurationSample, DurationSample)> {
    let parts = region_partition(a)?;
    let lengths = |list: &[(f64, f64)]| list.iter().map(|&(s, e)| e - s).collect();
    Ok((
        DurationSample {
            kind: RegionKind::Overlap,
            durations: lengths(&parts.overlaps),
        },
        DurationSample {
            kind: RegionKind::Silence,
            durations: lengths(&parts.silences),
        },
    ))
}
