//! Encoder architecture configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    Transformer,
    Conformer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frontend {
    /// 15-frame context stacking + 10x decimation, then one linear layer.
    Stacked,
    /// Two depthwise-separable 2-D conv layers with time strides 2 and 5.
    ConvSubsample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncoderConfig {
    pub arch: Arch,
    pub n_blocks: usize,
    pub d_model: usize,
    pub n_heads: usize,
    /// Hidden width of the position-wise feed-forward layers.
    pub ffn_dim: usize,
    /// Depthwise kernel length of the Conformer convolution module.
    pub conv_kernel: usize,
    pub n_speakers: usize,
    pub frontend: Frontend,
    /// Mel channels of the raw 10 ms input features.
    pub input_dims: usize,
    /// Channel widths after the two subsampling conv layers.
    pub frontend_channels: (usize, usize),
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig::transformer_default()
    }
}

impl EncoderConfig {
    /// Full-size Transformer encoder: 4 blocks, 256 attention units, 4
    /// heads, 1024-wide ReLU feed-forward.
    pub fn transformer_default() -> Self {
        EncoderConfig {
            arch: Arch::Transformer,
            n_blocks: 4,
            d_model: 256,
            n_heads: 4,
            ffn_dim: 1024,
            conv_kernel: 32,
            n_speakers: 2,
            frontend: Frontend::ConvSubsample,
            input_dims: 23,
            frontend_channels: (256, 256),
        }
    }

    /// Full-size Conformer encoder: 4 blocks, 256 attention units, 4
    /// heads, 256-wide swish feed-forward, kernel-32 convolution module.
    pub fn conformer_default() -> Self {
        EncoderConfig {
            arch: Arch::Conformer,
            ffn_dim: 256,
            ..EncoderConfig::transformer_default()
        }
    }

    /// Small config for gradient checks and overfit probes.
    pub fn toy(arch: Arch, frontend: Frontend) -> Self {
        EncoderConfig {
            arch,
            n_blocks: 2,
            d_model: 8,
            n_heads: 2,
            ffn_dim: 16,
            conv_kernel: 8,
            n_speakers: 2,
            frontend,
            input_dims: 23,
            frontend_channels: (2, 2),
        }
    }

    /// Frequency strides of the two subsampling layers: 1 for 23-channel
    /// inputs, 2 for 80-channel inputs.
    pub fn frontend_freq_strides(&self) -> Result<(usize, usize)> {
        match self.input_dims {
            23 => Ok((1, 1)),
            80 => Ok((2, 2)),
            other => Err(Error::config(format!(
                "conv subsampling frontend supports 23 or 80 input channels, got {other}"
            ))),
        }
    }

    /// Frequency extent after both subsampling layers.
    pub fn frontend_out_freq(&self) -> Result<usize> {
        let (s1, s2) = self.frontend_freq_strides()?;
        Ok(self.input_dims.div_ceil(s1).div_ceil(s2))
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.n_heads == 0 || !self.d_model.is_multiple_of(self.n_heads) {
            return Err(Error::config(format!(
                "d_model {} must be a positive multiple of n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.conv_kernel < 1 {
            return Err(Error::config("conv_kernel must be >= 1"));
        }
        if self.n_speakers < 1 {
            return Err(Error::config("n_speakers must be >= 1"));
        }
        if self.ffn_dim == 0 {
            return Err(Error::config("ffn_dim must be >= 1"));
        }
        if self.frontend == Frontend::ConvSubsample {
            self.frontend_freq_strides()?;
        }
        if self.frontend_channels.0 == 0 || self.frontend_channels.1 == 0 {
            return Err(Error::config("frontend_channels must be >= 1"));
        }
        Ok(())
    }
}
