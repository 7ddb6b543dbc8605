use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One pooled utterance: where its audio lives and how long it is.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub wav: PathBuf,
    pub duration: f64,
}

/// Utterances grouped by speaker, sorted by speaker id so iteration order
/// never depends on manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct UtterancePool {
    pub speakers: Vec<(String, Vec<PoolEntry>)>,
}

impl UtterancePool {
    pub fn n_speakers(&self) -> usize {
        self.speakers.len()
    }

    pub fn n_utterances(&self) -> usize {
        self.speakers.iter().map(|(_, utts)| utts.len()).sum()
    }
}

/// Reads a `speaker<TAB>wav-path<TAB>duration` manifest, dropping
/// utterances shorter than `min_utt_len` and then speakers left empty.
pub fn build_pool(manifest: impl AsRef<Path>, min_utt_len: f64) -> Result<UtterancePool> {
    let text = fs::read_to_string(manifest.as_ref())?;
    parse_manifest(&text, min_utt_len)
}

pub fn parse_manifest(text: &str, min_utt_len: f64) -> Result<UtterancePool> {
    if !(min_utt_len >= 0.0) {
        return Err(Error::input(format!(
            "pool: min_utt_len must be >= 0, got {min_utt_len}"
        )));
    }
    let mut speakers: Vec<(String, Vec<PoolEntry>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                lineno,
                format!("manifest: expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let (speaker, wav, dur_text) = (fields[0], fields[1], fields[2]);
        if speaker.is_empty() || wav.is_empty() {
            return Err(Error::parse(lineno, "manifest: empty speaker or wav path"));
        }
        let duration: f64 = dur_text.parse().map_err(|_| {
            Error::parse(lineno, format!("manifest: bad duration {dur_text:?}"))
        })?;
        if !duration.is_finite() || duration <= 0.0 {
            return Err(Error::parse(
                lineno,
                format!("manifest: duration must be positive, got {duration}"),
            ));
        }
        if duration < min_utt_len {
            continue;
        }
        let entry = PoolEntry { wav: PathBuf::from(wav), duration };
        match speakers.iter_mut().find(|(name, _)| name == speaker) {
            Some((_, utts)) => utts.push(entry),
            None => speakers.push((speaker.to_string(), vec![entry])),
        }
    }
    speakers.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(UtterancePool { speakers })
}
