//! Full diarization model: frontend, encoder block stack, final layer norm,
//! and a per-frame sigmoid head giving one speech posterior per speaker.
//!
//! `forward` consumes 10 ms feature frames and emits 100 ms posteriors;
//! `backward` consumes dL/dz from a loss and returns a parameter-shaped
//! gradient bundle. `decide` turns posteriors into labelled segments.

use crate::annotation::Annotation;
use crate::encoder::block::{block_backward, block_forward, BlockCache};
use crate::encoder::config::EncoderConfig;
use crate::encoder::frontend::{frontend_backward, frontend_forward, FrontendCache};
use crate::encoder::layers::RowNormCache;
use crate::encoder::params::EncoderParams;
use crate::error::{Error, Result};
use crate::numerics::{matmul, sigmoid, Matrix, Rng};

/// Posterior frame length in seconds: 10 ms features subsampled by 10.
pub const POSTERIOR_SHIFT: f64 = 0.1;

/// T' x S speech posteriors on the subsampled frame grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    pub data: Matrix,
    /// Seconds per row.
    pub frame_shift: f64,
}

impl PosteriorMatrix {
    pub fn frames(&self) -> usize {
        self.data.rows()
    }

    pub fn n_speakers(&self) -> usize {
        self.data.cols()
    }
}

pub struct ModelCache {
    frontend: FrontendCache,
    blocks: Vec<BlockCache>,
    final_ln: RowNormCache,
    /// Final layer-norm output, the head input.
    normed: Matrix,
    /// Sigmoid outputs, needed to chain dL/dz through the head.
    z: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: EncoderConfig,
    pub params: EncoderParams,
}

impl Model {
    pub fn new(config: EncoderConfig, params: EncoderParams) -> Result<Self> {
        config.validate()?;
        Ok(Model { config, params })
    }

    pub fn init(config: EncoderConfig, rng: &mut Rng) -> Result<Self> {
        let params = EncoderParams::init(&config, rng)?;
        Ok(Model { config, params })
    }

    /// All-zero weights (norm gains one): every posterior is exactly 0.5.
    pub fn zeros(config: EncoderConfig) -> Result<Self> {
        let params = EncoderParams::zeros(&config)?;
        Ok(Model { config, params })
    }

    pub fn forward(&self, feats: &Matrix) -> Result<(PosteriorMatrix, ModelCache)> {
        let (mut e, frontend) = frontend_forward(&self.params.frontend, &self.config, feats)?;
        let mut blocks = Vec::with_capacity(self.params.blocks.len());
        for block in &self.params.blocks {
            let (next, cache) = block_forward(block, &e, self.config.n_heads)?;
            e = next;
            blocks.push(cache);
        }
        let (normed, final_ln) = self.params.final_ln.forward_rows(&e)?;
        let logits = matmul(&normed, &self.params.head.w)?
            .add_row_broadcast(&self.params.head.b)?;
        let z = logits.map(sigmoid);
        Ok((
            PosteriorMatrix {
                data: z.clone(),
                frame_shift: POSTERIOR_SHIFT,
            },
            ModelCache {
                frontend,
                blocks,
                final_ln,
                normed,
                z,
            },
        ))
    }

    /// Reverse-mode pass from dL/dz (same shape as the posteriors) to a
    /// parameter-shaped gradient bundle.
    pub fn backward(&self, cache: &ModelCache, dz: &Matrix) -> Result<EncoderParams> {
        if dz.rows() != cache.z.rows() || dz.cols() != cache.z.cols() {
            return Err(Error::train(format!(
                "backward: dz is {}x{}, posteriors are {}x{}",
                dz.rows(),
                dz.cols(),
                cache.z.rows(),
                cache.z.cols()
            )));
        }
        let mut grads = self.params.zeros_like();
        // dL/dlogit = dL/dz * z * (1 - z)
        let dlogits = Matrix::from_fn(dz.rows(), dz.cols(), |t, s| {
            let z = cache.z.get(t, s);
            dz.get(t, s) * z * (1.0 - z)
        });
        let d_normed = self
            .params
            .head
            .backward_from(&cache.normed, &dlogits, &mut grads.head)?;
        let mut d = self.params.final_ln.backward_rows(
            &cache.final_ln,
            &d_normed,
            &mut grads.final_ln,
        )?;
        for ((block, cache), grad) in self
            .params
            .blocks
            .iter()
            .zip(&cache.blocks)
            .zip(&mut grads.blocks)
            .rev()
        {
            d = block_backward(block, cache, &d, self.config.n_heads, grad)?;
        }
        frontend_backward(
            &self.params.frontend,
            &self.config,
            &cache.frontend,
            &d,
            &mut grads.frontend,
        )?;
        Ok(grads)
    }
}

/// Threshold posteriors into per-speaker segments.
///
/// A frame is active when its posterior strictly exceeds `threshold`. An odd
/// `median_window` > 1 first smooths each speaker's binary sequence with a
/// majority vote over the window (replicate padding at the edges); 1 leaves
/// it untouched. Runs of active frames become segments on the 100 ms grid,
/// labelled `spk0`, `spk1`, ... by head column.
pub fn decide(
    post: &PosteriorMatrix,
    recording_id: &str,
    threshold: f64,
    median_window: usize,
) -> Result<Annotation> {
    if median_window == 0 || median_window % 2 == 0 {
        return Err(Error::config(format!(
            "decide: median window must be odd, got {median_window}"
        )));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::config(format!(
            "decide: threshold {threshold} outside [0, 1]"
        )));
    }
    let t_len = post.frames();
    let mut ann = Annotation::new(recording_id, t_len as f64 * post.frame_shift);
    for s in 0..post.n_speakers() {
        let active: Vec<bool> = (0..t_len)
            .map(|t| post.data.get(t, s) > threshold)
            .collect();
        let smoothed = if median_window == 1 {
            active
        } else {
            let half = (median_window / 2) as isize;
            (0..t_len as isize)
                .map(|t| {
                    let mut ones = 0;
                    for off in -half..=half {
                        let idx = (t + off).clamp(0, t_len as isize - 1) as usize;
                        ones += active[idx] as usize;
                    }
                    2 * ones > median_window
                })
                .collect()
        };
        let speaker = format!("spk{s}");
        let mut run_start: Option<usize> = None;
        for t in 0..=t_len {
            let on = t < t_len && smoothed[t];
            match (run_start, on) {
                (None, true) => run_start = Some(t),
                (Some(start), false) => {
                    ann.push(
                        &speaker,
                        start as f64 * post.frame_shift,
                        t as f64 * post.frame_shift,
                    );
                    run_start = None;
                }
                _ => {}
            }
        }
    }
    Ok(ann)
}
