//! Log-Mel filterbank features for 8 kHz telephone-band audio.
//!
//! Analysis settings, fixed: 25 ms frames (200 samples), 10 ms shift
//! (80 samples), symmetric Hann window, 256-point DFT (frames zero-padded),
//! power spectrum, triangular Mel filters spanning 0-4000 Hz on the
//! 2595*log10(1+f/700) scale, natural log with floor 1e-10.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::features::wav::Waveform;
use crate::numerics::Matrix;

pub const SAMPLE_RATE: u32 = 8000;
pub const FRAME_LEN: usize = 200; // 25 ms
pub const FRAME_SHIFT: usize = 80; // 10 ms
pub const LOG_FLOOR: f64 = 1e-10;
const NFFT: usize = 256;
const N_BINS: usize = NFFT / 2 + 1;

/// Time-major feature grid plus the hop duration of one row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: Matrix,
    /// Seconds between consecutive rows: 0.010 raw, 0.100 after
    /// stacking/subsampling.
    pub frame_shift: f64,
}

impl FeatureMatrix {
    pub fn frames(&self) -> usize {
        self.data.rows()
    }

    pub fn dims(&self) -> usize {
        self.data.cols()
    }
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Band edges of the triangular filters: n_mels + 2 points equally spaced
/// on the Mel scale between 0 Hz and Nyquist (4000 Hz), mapped back to Hz.
fn filter_edges_hz(n_mels: usize) -> Vec<f64> {
    let lo = hz_to_mel(0.0);
    let hi = hz_to_mel(SAMPLE_RATE as f64 / 2.0);
    (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect()
}

/// Center frequency (Hz) of each triangular filter; the channel with
/// center nearest a pure tone's frequency is where its energy lands.
pub fn mel_filterbank_centers_hz(n_mels: usize) -> Vec<f64> {
    filter_edges_hz(n_mels)[1..=n_mels].to_vec()
}

/// Dense filterbank matrix: n_mels rows of N_BINS triangle weights,
/// evaluated at the DFT bin centers k * 8000 / 256.
fn mel_filterbank(n_mels: usize) -> Vec<Vec<f64>> {
    let edges = filter_edges_hz(n_mels);
    let bin_hz = SAMPLE_RATE as f64 / NFFT as f64;
    (0..n_mels)
        .map(|m| {
            let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..N_BINS)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= center {
                        (f - lo) / (center - lo)
                    } else {
                        (hi - f) / (hi - center)
                    }
                })
                .collect()
        })
        .collect()
}

fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| {
            0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64).cos()
        })
        .collect()
}

/// Log-Mel features: T = floor((N - 200)/80) + 1 frames of `n_mels`
/// natural-log filterbank energies, 10 ms apart.
pub fn logmel(w: &Waveform, n_mels: usize) -> Result<FeatureMatrix> {
    if w.sample_rate != SAMPLE_RATE {
        return Err(Error::input(format!(
            "logmel: sample rate {} unsupported, need {}",
            w.sample_rate, SAMPLE_RATE
        )));
    }
    if w.samples.len() < FRAME_LEN {
        return Err(Error::input(format!(
            "logmel: waveform has {} samples, one frame needs {}",
            w.samples.len(),
            FRAME_LEN
        )));
    }
    let n_frames = (w.samples.len() - FRAME_LEN) / FRAME_SHIFT + 1;
    let window = hann_window(FRAME_LEN);
    let bank = mel_filterbank(n_mels);
    let fft = FftPlanner::new().plan_fft_forward(NFFT);

    let mut out = Matrix::zeros(n_frames, n_mels);
    let mut buf = vec![Complex::new(0.0, 0.0); NFFT];
    let mut power = vec![0.0; N_BINS];
    for t in 0..n_frames {
        let start = t * FRAME_SHIFT;
        for n in 0..NFFT {
            let x = if n < FRAME_LEN {
                w.samples[start + n] * window[n]
            } else {
                0.0
            };
            buf[n] = Complex::new(x, 0.0);
        }
        fft.process(&mut buf);
        for (k, p) in power.iter_mut().enumerate() {
            *p = buf[k].norm_sqr();
        }
        for (m, filter) in bank.iter().enumerate() {
            let energy: f64 = filter.iter().zip(&power).map(|(w, p)| w * p).sum();
            out.set(t, m, energy.max(LOG_FLOOR).ln());
        }
    }
    Ok(FeatureMatrix {
        data: out,
        frame_shift: FRAME_SHIFT as f64 / SAMPLE_RATE as f64,
    })
}
