use crate::error::{Error, Result};
use crate::features::Waveform;
use crate::numerics::Rng;

/// Largest representable 16-bit sample; clipping keeps output in [-1, 1).
const CLIP_MAX: f64 = 32767.0 / 32768.0;

/// Full convolution of the signal with a room impulse response, truncated
/// back to the signal's length.
pub fn apply_rir(w: &Waveform, rir: &[f64]) -> Result<Waveform> {
    if rir.is_empty() {
        return Err(Error::input("augment: empty impulse response"));
    }
    let n = w.samples.len();
    let mut out = vec![0.0f64; n];
    for (i, &x) in w.samples.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let top = rir.len().min(n - i);
        for (k, &h) in rir[..top].iter().enumerate() {
            out[i + k] += x * h;
        }
    }
    Ok(Waveform { samples: out, sample_rate: w.sample_rate })
}

/// Mean power over the samples where the signal itself is nonzero, for both
/// the signal and a companion track.
fn powers_over_signal_region(signal: &[f64], other: &[f64]) -> Option<(f64, f64)> {
    let mut n = 0usize;
    let (mut ps, mut pn) = (0.0, 0.0);
    for (&s, &o) in signal.iter().zip(other) {
        if s != 0.0 {
            ps += s * s;
            pn += o * o;
            n += 1;
        }
    }
    (n > 0).then(|| (ps / n as f64, pn / n as f64))
}

/// Adds a noise bed at the requested SNR: the clip is looped or truncated
/// to the mixture length and scaled so 10*log10(P_signal / P_noise) equals
/// `snr_db`, powers measured over the nonzero-signal region. The sum is
/// clipped to [-1, 1). `snr_db = +inf` disables the noise entirely.
pub fn add_noise(w: &Waveform, noise: &Waveform, snr_db: f64) -> Result<Waveform> {
    if snr_db == f64::INFINITY {
        return Ok(w.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::config(format!("augment: bad snr {snr_db}")));
    }
    if noise.samples.is_empty() {
        return Err(Error::input("augment: noise clip holds no samples"));
    }
    let n = w.samples.len();
    let bed: Vec<f64> = (0..n).map(|i| noise.samples[i % noise.samples.len()]).collect();
    let (p_signal, p_noise) = powers_over_signal_region(&w.samples, &bed)
        .ok_or_else(|| Error::input("augment: signal is all zeros"))?;
    if p_noise == 0.0 {
        return Err(Error::input("augment: noise clip is silent over the signal region"));
    }
    let scale = (p_signal / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt();
    let samples = w
        .samples
        .iter()
        .zip(&bed)
        .map(|(&s, &b)| (s + scale * b).clamp(-1.0, CLIP_MAX))
        .collect();
    Ok(Waveform { samples, sample_rate: w.sample_rate })
}

/// Reverberates (optionally) and then adds noise: one impulse response and
/// one noise clip are drawn uniformly from their pools. `snr_db = +inf`
/// skips the noise stage without consuming a draw.
pub fn augment_mixture(
    w: &Waveform,
    noise_pool: &[Waveform],
    rir_pool: &[Vec<f64>],
    snr_db: f64,
    use_rir: bool,
    rng: &mut Rng,
) -> Result<Waveform> {
    let mut out = if use_rir {
        if rir_pool.is_empty() {
            return Err(Error::config("augment: use_rir set but the impulse pool is empty"));
        }
        apply_rir(w, &rir_pool[rng.uniform_usize(rir_pool.len())])?
    } else {
        w.clone()
    };
    if snr_db != f64::INFINITY {
        if noise_pool.is_empty() {
            return Err(Error::config("augment: noise requested but the noise pool is empty"));
        }
        out = add_noise(&out, &noise_pool[rng.uniform_usize(noise_pool.len())], snr_db)?;
    }
    Ok(out)
}
