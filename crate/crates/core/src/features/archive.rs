//! Binary container for feature matrices moved between pipeline stages.
//!
//! Layout, all little-endian:
//!   magic "EENDFEAT" (8 bytes) | version u32 | frames u64 | dims u64 |
//!   frame_shift f64 | frames*dims payload values as f32, row-major.
//!
//! The payload is f32, so reading back a written matrix reproduces values
//! at f32 precision; writing an already-read archive is lossless.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::numerics::Matrix;

const MAGIC: &[u8; 8] = b"EENDFEAT";
const VERSION: u32 = 1;

pub fn write_feature_archive(path: impl AsRef<Path>, f: &FeatureMatrix) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 + 4 + 8 + 8 + 8 + 4 * f.frames() * f.dims());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(f.frames() as u64).to_le_bytes());
    bytes.extend_from_slice(&(f.dims() as u64).to_le_bytes());
    bytes.extend_from_slice(&f.frame_shift.to_le_bytes());
    for &v in f.data.data() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path.as_ref(), bytes)?;
    Ok(())
}

pub fn read_feature_archive(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let bytes = fs::read(path.as_ref())?;
    if bytes.len() < 36 {
        return Err(Error::format("feature archive: truncated header"));
    }
    if &bytes[0..8] != MAGIC {
        return Err(Error::format("feature archive: bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::format(format!(
            "feature archive: version {version}, expected {VERSION}"
        )));
    }
    let frames = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let dims = u64::from_le_bytes(bytes[20..28].try_into().unwrap()) as usize;
    let frame_shift = f64::from_le_bytes(bytes[28..36].try_into().unwrap());
    let payload = &bytes[36..];
    if payload.len() != frames * dims * 4 {
        return Err(Error::format(format!(
            "feature archive: payload holds {} bytes, header implies {}",
            payload.len(),
            frames * dims * 4
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    Ok(FeatureMatrix {
        data: Matrix::from_vec(frames, dims, values)
            .map_err(|e| Error::format(format!("feature archive: {e}")))?,
        frame_shift,
    })
}
