//! Minimal RIFF/WAVE reader and writer for the one format this crate
//! accepts: PCM, 16-bit, mono, 8 kHz.
//!
//! Samples are normalized by 32768, so the representable range is
//! [-1, 32767/32768]. Writing quantizes by round-to-nearest (ties away
//! from zero) and clamps, so any waveform that originated from 16-bit PCM
//! round-trips bit-for-bit.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Mono audio at 8 kHz, samples in [-1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>) -> Self {
        Waveform {
            samples,
            sample_rate: 8000,
        }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

fn read_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

pub fn load_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let bytes = fs::read(path.as_ref())?;
    parse_wav(&bytes)
}

fn parse_wav(bytes: &[u8]) -> Result<Waveform> {
    if bytes.len() < 12 {
        return Err(Error::format("wav: file shorter than the RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(Error::format("wav: missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(Error::format("wav: RIFF form type is not WAVE"));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let size = read_u32(bytes, at + 4) as usize;
        let body_start = at + 8;
        if body_start + size > bytes.len() {
            return Err(Error::format(format!(
                "wav: chunk {:?} overruns the file",
                String::from_utf8_lossy(id)
            )));
        }
        let body = &bytes[body_start..body_start + size];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::format("wav: fmt chunk shorter than 16 bytes"));
                }
                fmt = Some((
                    read_u16(body, 0),
                    read_u16(body, 2),
                    read_u32(body, 4),
                    read_u16(body, 14),
                ));
            }
            b"data" => data = Some(body),
            _ => {} // skip unknown chunks (LIST, fact, ...)
        }
        // chunk bodies are word-aligned
        at = body_start + size + (size & 1);
    }

    let (audio_format, channels, sample_rate, bits) =
        fmt.ok_or_else(|| Error::format("wav: missing fmt chunk"))?;
    if audio_format != 1 {
        return Err(Error::format(format!(
            "wav: audio_format is {audio_format}, expected 1 (PCM)"
        )));
    }
    if channels != 1 {
        return Err(Error::format(format!(
            "wav: channels is {channels}, expected 1 (mono)"
        )));
    }
    if sample_rate != 8000 {
        return Err(Error::format(format!(
            "wav: sample_rate is {sample_rate}, expected 8000"
        )));
    }
    if bits != 16 {
        return Err(Error::format(format!(
            "wav: bits_per_sample is {bits}, expected 16"
        )));
    }
    let data = data.ok_or_else(|| Error::format("wav: missing data chunk"))?;
    if data.len() % 2 != 0 {
        return Err(Error::format("wav: data chunk has an odd byte count"));
    }

    let samples = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
        .collect();
    Ok(Waveform {
        samples,
        sample_rate,
    })
}

pub fn write_wav(path: impl AsRef<Path>, w: &Waveform) -> Result<()> {
    let n = w.samples.len();
    let data_size = (n * 2) as u32;
    let mut bytes = Vec::with_capacity(44 + n * 2);
    bytes.extend_from_slice(b"RIFF");
    bytes.extend_from_slice(&(36 + data_size).to_le_bytes());
    bytes.extend_from_slice(b"WAVE");
    bytes.extend_from_slice(b"fmt ");
    bytes.extend_from_slice(&16u32.to_le_bytes());
    bytes.extend_from_slice(&1u16.to_le_bytes()); // PCM
    bytes.extend_from_slice(&1u16.to_le_bytes()); // mono
    bytes.extend_from_slice(&w.sample_rate.to_le_bytes());
    bytes.extend_from_slice(&(w.sample_rate * 2).to_le_bytes()); // byte rate
    bytes.extend_from_slice(&2u16.to_le_bytes()); // block align
    bytes.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    bytes.extend_from_slice(b"data");
    bytes.extend_from_slice(&data_size.to_le_bytes());
    for &s in &w.samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        bytes.extend_from_slice(&q.to_le_bytes());
    }
    fs::write(path.as_ref(), bytes)?;
    Ok(())
}
