use serde::{Deserialize, Serialize};

use crate::annotation::Annotation;
use crate::error::{Error, Result};
use crate::features::{load_wav, Waveform, SAMPLE_RATE};
use crate::numerics::Rng;
use crate::simulator::pool::UtterancePool;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_speakers: usize,
    pub n_utts_min: usize,
    pub n_utts_max: usize,
    /// Mean of the exponential silence gap laid before each utterance.
    pub gap_mean_beta: f64,
    pub min_utt_len: f64,
    /// Per-mixture SNR is drawn uniformly from this set; empty disables
    /// noise.
    pub snr_db: Vec<f64>,
    pub use_rir: bool,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_speakers: 2,
            n_utts_min: 10,
            n_utts_max: 20,
            gap_mean_beta: 4.0,
            min_utt_len: 0.0,
            snr_db: vec![10.0, 15.0, 20.0],
            use_rir: false,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_speakers != 2 {
            return Err(Error::config(format!(
                "simulate: only two-speaker mixtures are supported, got {}",
                self.n_speakers
            )));
        }
        if self.n_utts_min == 0 || self.n_utts_min > self.n_utts_max {
            return Err(Error::config(format!(
                "simulate: bad utterance count range {}..={}",
                self.n_utts_min, self.n_utts_max
            )));
        }
        // Zero is the degenerate no-gap law; negative or non-finite is vacuous.
        if !self.gap_mean_beta.is_finite() || self.gap_mean_beta < 0.0 {
            return Err(Error::config(format!(
                "simulate: gap_mean_beta must be finite and >= 0, got {}",
                self.gap_mean_beta
            )));
        }
        if !self.min_utt_len.is_finite() || self.min_utt_len < 0.0 {
            return Err(Error::config(format!(
                "simulate: min_utt_len must be >= 0, got {}",
                self.min_utt_len
            )));
        }
        if self.snr_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("simulate: snr_db entries must be finite"));
        }
        Ok(())
    }
}

/// One placed utterance: where its audio lives on the sample grid.
struct Placement {
    speaker: usize,
    start_sample: usize,
    samples: Vec<f64>,
}

/// Draws one two-speaker mixture: picks two distinct speakers uniformly,
/// gives each 'n_utts' utterances laid head-to-tail from t = 0 with an
/// exponential silence gap before every utterance, and sums the two speaker
/// tracks sample-wise (shorter track zero-padded). All placement times are
/// quantized to the sample grid, so the annotation and the audio agree
/// exactly.
pub fn simulate_mixture(
    pool: &UtterancePool,
    cfg: &SimConfig,
    rng: &mut Rng,
    recording_id: &str,
) -> Result<(Waveform, Annotation)> {
    cfg.validate()?;
    if pool.n_speakers() < 2 {
        return Err(Error::input(format!(
            "simulate: pool has {} speakers, need at least 2",
            pool.n_speakers()
        )));
    }
    let sr = SAMPLE_RATE as f64;

    // Two distinct speakers, uniform without replacement.
    let first = rng.uniform_usize(pool.n_speakers());
    let mut second = rng.uniform_usize(pool.n_speakers() - 1);
    if second >= first {
        second += 1;
    }

    let mut placements: Vec<Placement> = Vec::new();
    let mut names: Vec<&str> = Vec::new();
    for (track, &spk) in [first, second].iter().enumerate() {
        let (name, utts) = &pool.speakers[spk];
        names.push(name);
        let n_utts =
            cfg.n_utts_min + rng.uniform_usize(cfg.n_utts_max - cfg.n_utts_min + 1);
        let mut cursor = 0usize; // samples
        for _ in 0..n_utts {
            let gap = rng.exponential(cfg.gap_mean_beta);
            let utt = &utts[rng.uniform_usize(utts.len())];
            let w = load_wav(&utt.wav)?;
            if w.sample_rate != SAMPLE_RATE {
                return Err(Error::input(format!(
                    "simulate: {} is {} Hz, expected {} Hz",
                    utt.wav.display(),
                    w.sample_rate,
                    SAMPLE_RATE
                )));
            }
            if w.samples.is_empty() {
                return Err(Error::input(format!(
                    "simulate: {} holds no samples",
                    utt.wav.display()
                )));
            }
            cursor += (gap * sr).round() as usize;
            placements.push(Placement {
                speaker: track,
                start_sample: cursor,
                samples: w.samples,
            });
            cursor += placements.last().unwrap().samples.len();
        }
    }

    let total = placements
        .iter()
        .map(|p| p.start_sample + p.samples.len())
        .max()
        .unwrap_or(0);
    let mut mix = vec![0.0f64; total];
    let mut ann = Annotation::new(recording_id, total as f64 / sr);
    for p in &placements {
        for (i, &v) in p.samples.iter().enumerate() {
            mix[p.start_sample + i] += v;
        }
        ann.push(
            names[p.speaker],
            p.start_sample as f64 / sr,
            (p.start_sample + p.samples.len()) as f64 / sr,
        );
    }
    ann.validate()?;
    Ok((Waveform::new(mix), ann))
}

/// Mixture `index` of a corpus: seeds an independent stream from
/// (corpus seed, index) so any generation order or parallel schedule yields
/// the same corpus.
pub fn corpus_mixture(
    pool: &UtterancePool,
    cfg: &SimConfig,
    index: u64,
    recording_id: &str,
) -> Result<(Waveform, Annotation)> {
    let mut rng = Rng::new(Rng::child_seed(cfg.seed, index));
    simulate_mixture(pool, cfg, &mut rng, recording_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::write_wav;
    use crate::simulator::pool::parse_manifest;
    use crate::turntaking::region_partition;
    use std::fmt::Write as _;
    use std::path::Path;

    /// Writes a deterministic little utterance and returns its exact
    /// decoded duration in samples.
    fn write_tone(path: &Path, n_samples: usize, amp: f64) -> f64 {
        let samples: Vec<f64> =
            (0..n_samples).map(|i| amp * (i as f64 * 0.7).sin()).collect();
        write_wav(path, &Waveform::new(samples)).unwrap();
        n_samples as f64 / SAMPLE_RATE as f64
    }

    /// A pool of `utts_per_speaker` utterances for speakers s0/s1, with
    /// lengths cycling over `lens` samples.
    fn tone_pool(dir: &Path, utts_per_speaker: usize, lens: &[usize]) -> UtterancePool {
        let mut manifest = String::new();
        for spk in 0..2 {
            for u in 0..utts_per_speaker {
                let n = lens[(spk * utts_per_speaker + u) % lens.len()];
                let path = dir.join(format!("s{spk}u{u}.wav"));
                let dur = write_tone(&path, n, 0.1 + 0.05 * spk as f64);
                writeln!(manifest, "s{spk}\t{}\t{dur}", path.display()).unwrap();
            }
        }
        parse_manifest(&manifest, 0.0).unwrap()
    }

    fn small_cfg() -> SimConfig {
        SimConfig {
            n_utts_min: 2,
            n_utts_max: 4,
            gap_mean_beta: 0.5,
            ..SimConfig::default()
        }
    }

    #[test]
    fn degenerate_gap_law_starts_both_speakers_at_zero() {
        let dir = tempfile::tempdir().unwrap();
        let pool = tone_pool(dir.path(), 1, &[4000, 6400]);
        let cfg = SimConfig {
            n_utts_min: 1,
            n_utts_max: 1,
            gap_mean_beta: 0.0,
            ..SimConfig::default()
        };
        let (w, ann) = simulate_mixture(&pool, &cfg, &mut Rng::new(3), "rec").unwrap();
        assert_eq!(ann.segments.len(), 2);
        for seg in &ann.segments {
            assert_eq!(seg.start, 0.0);
        }
        // Overlap = the shorter utterance, 4000 samples = 0.5 s.
        let parts = region_partition(&ann).unwrap();
        assert_eq!(parts.overlaps.len(), 1);
        let (s, e) = parts.overlaps[0];
        assert!((e - s - 0.5).abs() < 1e-12);
        assert_eq!(w.samples.len(), 6400);
    }

    #[test]
    fn segment_lengths_equal_their_source_utterances() {
        let dir = tempfile::tempdir().unwrap();
        let lens = [4000usize, 5600, 7200, 8800];
        let pool = tone_pool(dir.path(), 2, &lens);
        let (_, ann) = corpus_mixture(&pool, &small_cfg(), 0, "rec").unwrap();
        let sr = SAMPLE_RATE as f64;
        let allowed: Vec<f64> = lens.iter().map(|&n| n as f64 / sr).collect();
        assert!(!ann.segments.is_empty());
        for seg in &ann.segments {
            let d = seg.end - seg.start;
            assert!(
                allowed.iter().any(|&a| (a - d).abs() < 1e-12),
                "segment duration {d} not an utterance length"
            );
        }
    }

    #[test]
    fn mixture_is_the_exact_sum_of_annotated_tracks() {
        let dir = tempfile::tempdir().unwrap();
        let pool = tone_pool(dir.path(), 2, &[4000, 5600, 6400]);
        let (w, ann) = corpus_mixture(&pool, &small_cfg(), 1, "rec").unwrap();
        let sr = SAMPLE_RATE as f64;

        // Rebuild per-speaker tracks from the annotation and the pool audio,
        // then add them; must match the emitted mixture bit for bit.
        let mut tracks = vec![vec![0.0f64; w.samples.len()]; 2];
        for seg in &ann.segments {
            let spk: usize = seg.speaker.strip_prefix('s').unwrap().parse().unwrap();
            let start = (seg.start * sr).round() as usize;
            let n = ((seg.end - seg.start) * sr).round() as usize;
            // Find the pool utterance with this exact length.
            let (_, utts) = pool.speakers.iter().find(|(name, _)| *name == seg.speaker).unwrap();
            let source = utts
                .iter()
                .map(|u| load_wav(&u.wav).unwrap())
                .find(|w| w.samples.len() == n)
                .expect("a pool utterance matches the segment length");
            for (i, &v) in source.samples.iter().enumerate() {
                assert_eq!(tracks[spk][start + i], 0.0, "same-speaker overlap");
                tracks[spk][start + i] = v;
            }
        }
        for i in 0..w.samples.len() {
            assert_eq!(w.samples[i], tracks[0][i] + tracks[1][i], "sample {i}");
        }
    }

    #[test]
    fn same_index_reproduces_the_same_mixture() {
        let dir = tempfile::tempdir().unwrap();
        let pool = tone_pool(dir.path(), 2, &[4000, 5600]);
        let cfg = small_cfg();
        let (w1, a1) = corpus_mixture(&pool, &cfg, 7, "rec").unwrap();
        let (w2, a2) = corpus_mixture(&pool, &cfg, 7, "rec").unwrap();
        assert_eq!(w1.samples, w2.samples);
        assert_eq!(a1, a2);
        let (w3, _) = corpus_mixture(&pool, &cfg, 8, "rec").unwrap();
        assert_ne!(w1.samples, w3.samples);
    }

    #[test]
    fn single_speaker_pool_is_an_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("only.wav");
        let dur = write_tone(&path, 4000, 0.1);
        let pool =
            parse_manifest(&format!("solo\t{}\t{dur}\n", path.display()), 0.0).unwrap();
        let err = simulate_mixture(&pool, &SimConfig::default(), &mut Rng::new(1), "rec");
        assert!(err.is_err());
    }

    #[test]
    fn corpus_overlap_ratio_agrees_with_a_sample_grid_count() {
        let dir = tempfile::tempdir().unwrap();
        let pool = tone_pool(dir.path(), 2, &[2400, 4000, 5600]);
        let cfg = small_cfg();
        let (mut num, mut den) = (0.0, 0.0); // interval sweep, pooled
        let (mut grid_overlap, mut grid_speech) = (0u64, 0u64);
        for index in 0..200 {
            let (_, ann) = corpus_mixture(&pool, &cfg, index, "rec").unwrap();
            let parts = region_partition(&ann).unwrap();
            num += parts.overlaps.iter().map(|(s, e)| e - s).sum::<f64>();
            den += parts
                .overlaps
                .iter()
                .chain(parts.exclusive.iter())
                .map(|(s, e)| e - s)
                .sum::<f64>();

            // Oracle: count sample-grid cells by active-speaker count. All
            // boundaries sit on the grid, so the count is exact.
            let n_cells = (ann.duration * SAMPLE_RATE as f64).round() as usize;
            let mut active = vec![0u8; n_cells];
            for seg in &ann.segments {
                let s = (seg.start * SAMPLE_RATE as f64).round() as usize;
                let e = (seg.end * SAMPLE_RATE as f64).round() as usize;
                for a in &mut active[s..e] {
                    *a += 1;
                }
            }
            grid_overlap += active.iter().filter(|&&a| a >= 2).count() as u64;
            grid_speech += active.iter().filter(|&&a| a >= 1).count() as u64;
        }
        let ratio = num / den;
        let grid_ratio = grid_overlap as f64 / grid_speech as f64;
        assert!(
            (ratio - grid_ratio).abs() < 1e-9,
            "sweep {ratio} vs grid {grid_ratio}"
        );
        assert!(ratio > 0.0 && ratio < 1.0);
    }

    #[test]
    fn mean_silence_gap_tracks_the_configured_beta() {
        let dir = tempfile::tempdir().unwrap();
        let pool = tone_pool(dir.path(), 1, &[800]);
        let beta = 0.7;
        let cfg = SimConfig {
            n_utts_min: 6,
            n_utts_max: 6,
            gap_mean_beta: beta,
            ..SimConfig::default()
        };
        // Gaps = start minus previous end per speaker, pooled over mixtures.
        let mut gaps: Vec<f64> = Vec::new();
        let mut index = 0;
        while gaps.len() < 10_000 {
            let (_, ann) = corpus_mixture(&pool, &cfg, index, "rec").unwrap();
            index += 1;
            for spk in ["s0", "s1"] {
                let mut cursor = 0.0;
                for seg in ann.segments.iter().filter(|s| s.speaker == spk) {
                    gaps.push(seg.start - cursor);
                    cursor = seg.end;
                }
            }
        }
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!(
            (mean - beta).abs() <= 0.05 * beta,
            "mean gap {mean} vs beta {beta}"
        );
    }

    #[test]
    fn smaller_gaps_mean_more_overlap() {
        let dir = tempfile::tempdir().unwrap();
        let pool = tone_pool(dir.path(), 2, &[2400, 4000]);
        let ratio_at = |beta: f64| {
            let cfg = SimConfig {
                n_utts_min: 3,
                n_utts_max: 5,
                gap_mean_beta: beta,
                ..SimConfig::default()
            };
            let (mut num, mut den) = (0.0, 0.0);
            for index in 0..100 {
                let (_, ann) = corpus_mixture(&pool, &cfg, index, "rec").unwrap();
                let parts = region_partition(&ann).unwrap();
                num += parts.overlaps.iter().map(|(s, e)| e - s).sum::<f64>();
                den += parts
                    .overlaps
                    .iter()
                    .chain(parts.exclusive.iter())
                    .map(|(s, e)| e - s)
                    .sum::<f64>();
            }
            num / den
        };
        let (lo, mid, hi) = (ratio_at(0.3), ratio_at(1.5), ratio_at(6.0));
        assert!(lo > mid && mid > hi, "overlap ratios {lo} {mid} {hi} not decreasing");
    }

    #[test]
    fn bad_configs_are_rejected() {
        let cases = [
            SimConfig { n_speakers: 3, ..SimConfig::default() },
            SimConfig { n_utts_min: 0, ..SimConfig::default() },
            SimConfig { n_utts_min: 5, n_utts_max: 4, ..SimConfig::default() },
            SimConfig { gap_mean_beta: -1.0, ..SimConfig::default() },
            SimConfig { min_utt_len: f64::NAN, ..SimConfig::default() },
        ];
        for cfg in cases {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
