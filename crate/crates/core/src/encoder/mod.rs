//! Self-attentive diarization encoder with hand-written reverse-mode
//! gradients.
//!
//! A model maps T x F log-mel frames (10 ms) to T' x S per-speaker speech
//! posteriors (100 ms, T' = ceil(T/10)) through a subsampling frontend, a
//! stack of transformer or conformer blocks without positional encoding, a
//! final layer norm, and a sigmoid head. Every forward returns the caches
//! its backward needs; gradients come back as a parameter-shaped bundle.

mod attention;
mod block;
mod checkpoint;
mod config;
mod convmodule;
mod count;
mod frontend;
mod layers;
mod model;
mod params;

pub use block::{block_forward, BlockCache};
pub use checkpoint::{checkpoint_bytes, checkpoint_from_bytes, read_checkpoint, write_checkpoint};
pub use config::{Arch, EncoderConfig, Frontend};
pub use count::{parameter_count, CountEntry, ParameterCount};
pub use layers::NORM_EPS;
pub use model::{decide, Model, ModelCache, PosteriorMatrix, POSTERIOR_SHIFT};
pub use params::{
    AttentionParams, BlockParams, ConformerBlockParams, ConvLayerParams, ConvModuleParams,
    EncoderParams, FfnParams, FrontendParams, Linear, NormParams, TransformerBlockParams,
};
