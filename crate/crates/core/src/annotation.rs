//! Speaker-labelled time segments for one recording.
//!
//! Times are seconds from the start of the recording. Segments carry
//! `(speaker, start, end)` with `start <= end`; a speaker's segments may
//! overlap other speakers' segments (that is the interesting case) and, in
//! raw annotations, even their own — nothing here forces merging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One speech interval by one speaker, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub speaker: String,
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn new(speaker: impl Into<String>, start: f64, end: f64) -> Self {
        Segment {
            speaker: speaker.into(),
            start,
            end,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// All speech segments of one recording plus its total duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub recording_id: String,
    pub segments: Vec<Segment>,
    /// Recording length in seconds; segments must fit inside `[0, duration]`.
    pub duration: f64,
}

impl Annotation {
    pub fn new(recording_id: impl Into<String>, duration: f64) -> Self {
        Annotation {
            recording_id: recording_id.into(),
            segments: Vec::new(),
            duration,
        }
    }

    pub fn push(&mut self, speaker: impl Into<String>, start: f64, end: f64) {
        self.segments.push(Segment::new(speaker, start, end));
    }

    /// Distinct speaker names in first-appearance order.
    pub fn speakers(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for seg in &self.segments {
            if !seen.contains(&seg.speaker.as_str()) {
                seen.push(&seg.speaker);
            }
        }
        seen
    }

    /// Total speech time of one speaker (sum of raw segment durations).
    pub fn speaker_time(&self, speaker: &str) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.speaker == speaker)
            .map(Segment::duration)
            .sum()
    }

    /// Rejects inverted, out-of-range, or non-finite segments.
    pub fn validate(&self) -> Result<()> {
        if !self.duration.is_finite() || self.duration < 0.0 {
            return Err(Error::input(format!(
                "annotation {}: bad duration {}",
                self.recording_id, self.duration
            )));
        }
        for seg in &self.segments {
            if !seg.start.is_finite() || !seg.end.is_finite() || seg.start > seg.end {
                return Err(Error::input(format!(
                    "annotation {}: bad segment [{}, {}] for {}",
                    self.recording_id, seg.start, seg.end, seg.speaker
                )));
            }
            if seg.start < 0.0 || seg.end > self.duration + 1e-9 {
                return Err(Error::input(format!(
                    "annotation {}: segment [{}, {}] outside [0, {}]",
                    self.recording_id, seg.start, seg.end, self.duration
                )));
            }
        }
        Ok(())
    }
}
