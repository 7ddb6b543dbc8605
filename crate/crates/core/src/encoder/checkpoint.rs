//! Model checkpoints: a small binary container holding the JSON config and
//! every named tensor as little-endian f64, in canonical visitation order.
//!
//! Layout:
//!   magic  "EENDCKPT" (8 bytes)
//!   u32    format version (currently 1)
//!   u64    config JSON length, then that many JSON bytes
//!   per tensor, in [`EncoderParams::tensors`] order:
//!     u64  name length, then the UTF-8 name
//!     u64  element count, then count f64 values
//!
//! Readers rebuild the parameter skeleton from the config and demand exact
//! name/count agreement, so a checkpoint is valid only for its own config.

use std::path::Path;

use crate::encoder::config::EncoderConfig;
use crate::encoder::model::Model;
use crate::encoder::params::EncoderParams;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"EENDCKPT";
const VERSION: u32 = 1;

pub fn checkpoint_bytes(model: &Model) -> Result<Vec<u8>> {
    let config_json = serde_json::to_string(&model.config)
        .map_err(|e| Error::internal(format!("checkpoint: config serialization: {e}")))?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(config_json.len() as u64).to_le_bytes());
    out.extend_from_slice(config_json.as_bytes());
    for (name, values) in model.params.tensors() {
        out.extend_from_slice(&(name.len() as u64).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(values.len() as u64).to_le_bytes());
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.at + n > self.buf.len() {
            return Err(Error::format(format!(
                "checkpoint: truncated while reading {what} (need {n} bytes at offset {})",
                self.at
            )));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32_le(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64_le(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<Model> {
    let mut r = Reader { buf: bytes, at: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(Error::format(
            "checkpoint: bad magic (not a checkpoint file)".to_string(),
        ));
    }
    let version = r.u32_le("version")?;
    if version != VERSION {
        return Err(Error::format(format!(
            "checkpoint: unsupported version {version} (expected {VERSION})"
        )));
    }
    let json_len = r.u64_le("config length")? as usize;
    let config_json = std::str::from_utf8(r.take(json_len, "config JSON")?)
        .map_err(|e| Error::format(format!("checkpoint: config is not UTF-8: {e}")))?;
    let config: EncoderConfig = serde_json::from_str(config_json)
        .map_err(|e| Error::format(format!("checkpoint: config JSON: {e}")))?;
    let mut params = EncoderParams::zeros(&config)?;
    for (name, values) in params.tensors_mut() {
        let name_len = r.u64_le("tensor name length")? as usize;
        let got = std::str::from_utf8(r.take(name_len, "tensor name")?)
            .map_err(|e| Error::format(format!("checkpoint: tensor name: {e}")))?;
        if got != name {
            return Err(Error::format(format!(
                "checkpoint: tensor order mismatch: found {got}, expected {name}"
            )));
        }
        let count = r.u64_le("tensor count")? as usize;
        if count != values.len() {
            return Err(Error::format(format!(
                "checkpoint: tensor {name} holds {count} values, config wants {}",
                values.len()
            )));
        }
        for v in values.iter_mut() {
            *v = f64::from_le_bytes(r.take(8, "tensor values")?.try_into().unwrap());
        }
    }
    if r.at != bytes.len() {
        return Err(Error::format(format!(
            "checkpoint: {} trailing bytes after the last tensor",
            bytes.len() - r.at
        )));
    }
    Model::new(config, params)
}

pub fn write_checkpoint(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    Ok(std::fs::write(path, checkpoint_bytes(model)?)?)
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Model> {
    checkpoint_from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::config::{Arch, Frontend};
    use crate::numerics::Rng;

    fn toy_model(seed: u64) -> Model {
        let cfg = EncoderConfig::toy(Arch::Conformer, Frontend::ConvSubsample);
        Model::init(cfg, &mut Rng::new(seed)).unwrap()
    }

    #[test]
    fn round_trip_is_exact_and_byte_identical() {
        let model = toy_model(81);
        let bytes = checkpoint_bytes(&model).unwrap();
        let back = checkpoint_from_bytes(&bytes).unwrap();
        assert_eq!(back.config, model.config);
        assert_eq!(back.params, model.params);
        assert_eq!(checkpoint_bytes(&back).unwrap(), bytes);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let model = toy_model(82);
        write_checkpoint(&path, &model).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back.params, model.params);
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let mut bytes = checkpoint_bytes(&toy_model(83)).unwrap();
        bytes[0] = b'X';
        let err = checkpoint_from_bytes(&bytes).unwrap_err();
        assert!(err.to_string().contains("magic"), "{err}");
    }

    #[test]
    fn wrong_version_is_a_format_error() {
        let mut bytes = checkpoint_bytes(&toy_model(84)).unwrap();
        bytes[8] = 9;
        let err = checkpoint_from_bytes(&bytes).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn truncation_is_a_format_error() {
        let bytes = checkpoint_bytes(&toy_model(85)).unwrap();
        let err = checkpoint_from_bytes(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
    }

    #[test]
    fn trailing_garbage_is_a_format_error() {
        let mut bytes = checkpoint_bytes(&toy_model(86)).unwrap();
        bytes.push(0);
        let err = checkpoint_from_bytes(&bytes).unwrap_err();
        assert!(err.to_string().contains("trailing"), "{err}");
    }

    #[test]
    fn config_mismatch_in_tensor_stream_is_detected() {
        // Swap in a different config but keep the old tensor stream: the
        // first mismatching tensor shape must be reported.
        let model = toy_model(87);
        let bytes = checkpoint_bytes(&model).unwrap();
        let other_cfg = EncoderConfig::toy(Arch::Transformer, Frontend::ConvSubsample);
        let other_json = serde_json::to_string(&other_cfg).unwrap();
        let old_json_len = serde_json::to_string(&model.config).unwrap().len();
        let mut swapped = Vec::new();
        swapped.extend_from_slice(&bytes[..12]);
        swapped.extend_from_slice(&(other_json.len() as u64).to_le_bytes());
        swapped.extend_from_slice(other_json.as_bytes());
        swapped.extend_from_slice(&bytes[20 + old_json_len..]);
        assert!(checkpoint_from_bytes(&swapped).is_err());
    }
}
