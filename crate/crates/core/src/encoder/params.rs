//! Parameter containers for the encoder.
//!
//! Gradients reuse these same types (a gradient is a parameter-shaped
//! bundle of numbers), so the optimizer, checkpoint averaging and the
//! finite-difference harness all work over one flat, name-addressed view.
//! Tensor visitation order is fixed by construction and documented by the
//! `tensors()` implementation: frontend, blocks in order, final norm,
//! head. Checkpoints and flat vectors rely on that order.

use crate::encoder::config::{Arch, EncoderConfig, Frontend};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Affine map x -> x w + b with w laid out in_dim x out_dim.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl Linear {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Linear {
            w: Matrix::zeros(in_dim, out_dim),
            b: vec![0.0; out_dim],
        }
    }

    fn init(in_dim: usize, out_dim: usize, rng: &mut Rng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        Linear {
            w: Matrix::from_fn(in_dim, out_dim, |_, _| rng.uniform_f64(-limit, limit)),
            b: vec![0.0; out_dim],
        }
    }
}

/// Per-feature gain and shift of a normalization layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NormParams {
    pub gain: Vec<f64>,
    pub bias: Vec<f64>,
}

impl NormParams {
    pub fn ones(dim: usize) -> Self {
        NormParams {
            gain: vec![1.0; dim],
            bias: vec![0.0; dim],
        }
    }

    pub fn zeros(dim: usize) -> Self {
        NormParams {
            gain: vec![0.0; dim],
            bias: vec![0.0; dim],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub wq: Linear,
    pub wk: Linear,
    pub wv: Linear,
    pub wo: Linear,
}

impl AttentionParams {
    fn zeros(d: usize) -> Self {
        AttentionParams {
            wq: Linear::zeros(d, d),
            wk: Linear::zeros(d, d),
            wv: Linear::zeros(d, d),
            wo: Linear::zeros(d, d),
        }
    }

    fn init(d: usize, rng: &mut Rng) -> Self {
        AttentionParams {
            wq: Linear::init(d, d, rng),
            wk: Linear::init(d, d, rng),
            wv: Linear::init(d, d, rng),
            wo: Linear::init(d, d, rng),
        }
    }
}

/// Two-layer position-wise feed-forward with its entry normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct FfnParams {
    pub ln: NormParams,
    pub lin1: Linear,
    pub lin2: Linear,
}

impl FfnParams {
    fn zeros(d: usize, hidden: usize) -> Self {
        FfnParams {
            ln: NormParams::ones(d),
            lin1: Linear::zeros(d, hidden),
            lin2: Linear::zeros(hidden, d),
        }
    }

    fn init(d: usize, hidden: usize, rng: &mut Rng) -> Self {
        FfnParams {
            ln: NormParams::ones(d),
            lin1: Linear::init(d, hidden, rng),
            lin2: Linear::init(hidden, d, rng),
        }
    }
}

/// Conformer convolution module: pointwise expand to 2D, GLU gate,
/// depthwise kernel-K conv with bias, per-channel scale+shift norm over
/// time, swish, pointwise back to D.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvModuleParams {
    pub ln: NormParams,
    pub pw1: Linear,
    /// Depthwise taps, one row of K per channel.
    pub dw: Matrix,
    pub dw_bias: Vec<f64>,
    pub norm: NormParams,
    pub pw2: Linear,
}

impl ConvModuleParams {
    fn zeros(d: usize, kernel: usize) -> Self {
        ConvModuleParams {
            ln: NormParams::ones(d),
            pw1: Linear::zeros(d, 2 * d),
            dw: Matrix::zeros(d, kernel),
            dw_bias: vec![0.0; d],
            norm: NormParams::ones(d),
            pw2: Linear::zeros(d, d),
        }
    }

    fn init(d: usize, kernel: usize, rng: &mut Rng) -> Self {
        let limit = (6.0 / (2 * kernel) as f64).sqrt();
        ConvModuleParams {
            ln: NormParams::ones(d),
            pw1: Linear::init(d, 2 * d, rng),
            dw: Matrix::from_fn(d, kernel, |_, _| rng.uniform_f64(-limit, limit)),
            dw_bias: vec![0.0; d],
            norm: NormParams::ones(d),
            pw2: Linear::init(d, d, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformerBlockParams {
    pub ln1: NormParams,
    pub attn: AttentionParams,
    pub ln2: NormParams,
    pub lin1: Linear,
    pub lin2: Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformerBlockParams {
    pub ffn1: FfnParams,
    pub attn_ln: NormParams,
    pub attn: AttentionParams,
    pub conv: ConvModuleParams,
    pub ffn2: FfnParams,
    pub ln_out: NormParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockParams {
    Transformer(TransformerBlockParams),
    Conformer(ConformerBlockParams),
}

/// One depthwise-separable 2-D conv layer of the subsampling frontend.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayerParams {
    /// c_in rows of k_t*k_f depthwise taps.
    pub dw: Matrix,
    /// c_in x c_out pointwise mix.
    pub pw: Matrix,
    pub pw_bias: Vec<f64>,
}

impl ConvLayerParams {
    fn zeros(c_in: usize, c_out: usize, k: usize) -> Self {
        ConvLayerParams {
            dw: Matrix::zeros(c_in, k * k),
            pw: Matrix::zeros(c_in, c_out),
            pw_bias: vec![0.0; c_out],
        }
    }

    fn init(c_in: usize, c_out: usize, k: usize, rng: &mut Rng) -> Self {
        let dw_limit = (6.0 / (2 * k * k) as f64).sqrt();
        let pw_limit = (6.0 / (c_in + c_out) as f64).sqrt();
        ConvLayerParams {
            dw: Matrix::from_fn(c_in, k * k, |_, _| rng.uniform_f64(-dw_limit, dw_limit)),
            pw: Matrix::from_fn(c_in, c_out, |_, _| rng.uniform_f64(-pw_limit, pw_limit)),
            pw_bias: vec![0.0; c_out],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrontendParams {
    /// Linear over 15-frame stacked features.
    Stacked { linear: Linear },
    /// Two strided depthwise-separable conv layers + flatten linear.
    Conv {
        layer1: ConvLayerParams,
        layer2: ConvLayerParams,
        linear: Linear,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub frontend: FrontendParams,
    pub blocks: Vec<BlockParams>,
    pub final_ln: NormParams,
    pub head: Linear,
}

impl EncoderParams {
    /// All-zero weights with normalization gains at one, the anchor for
    /// structural zero-parameter checks; `zeros_like` derives true zero
    /// bundles for gradients.
    pub fn zeros(cfg: &EncoderConfig) -> Result<Self> {
        Self::build(cfg, None)
    }

    /// Glorot-uniform weights (biases zero, norm gains one) drawn from the
    /// given stream in visitation order, one value per element.
    pub fn init(cfg: &EncoderConfig, rng: &mut Rng) -> Result<Self> {
        Self::build(cfg, Some(rng))
    }

    fn build(cfg: &EncoderConfig, mut rng: Option<&mut Rng>) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.d_model;
        // Every constructor pair below must agree on shapes.
        let linear = |i: usize, o: usize, rng: &mut Option<&mut Rng>| match rng {
            Some(r) => Linear::init(i, o, r),
            None => Linear::zeros(i, o),
        };
        let frontend = match cfg.frontend {
            Frontend::Stacked => FrontendParams::Stacked {
                linear: linear(15 * cfg.input_dims, d, &mut rng),
            },
            Frontend::ConvSubsample => {
                let (c1, c2) = cfg.frontend_channels;
                let f_out = cfg.frontend_out_freq()?;
                let (l1, l2) = match &mut rng {
                    Some(r) => (
                        ConvLayerParams::init(1, c1, 3, r),
                        ConvLayerParams::init(c1, c2, 7, r),
                    ),
                    None => (
                        ConvLayerParams::zeros(1, c1, 3),
                        ConvLayerParams::zeros(c1, c2, 7),
                    ),
                };
                FrontendParams::Conv {
                    layer1: l1,
                    layer2: l2,
                    linear: linear(f_out * c2, d, &mut rng),
                }
            }
        };
        let mut blocks = Vec::with_capacity(cfg.n_blocks);
        for _ in 0..cfg.n_blocks {
            blocks.push(match cfg.arch {
                Arch::Transformer => BlockParams::Transformer(TransformerBlockParams {
                    ln1: NormParams::ones(d),
                    attn: match &mut rng {
                        Some(r) => AttentionParams::init(d, r),
                        None => AttentionParams::zeros(d),
                    },
                    ln2: NormParams::ones(d),
                    lin1: linear(d, cfg.ffn_dim, &mut rng),
                    lin2: linear(cfg.ffn_dim, d, &mut rng),
                }),
                Arch::Conformer => BlockParams::Conformer(ConformerBlockParams {
                    ffn1: match &mut rng {
                        Some(r) => FfnParams::init(d, cfg.ffn_dim, r),
                        None => FfnParams::zeros(d, cfg.ffn_dim),
                    },
                    attn_ln: NormParams::ones(d),
                    attn: match &mut rng {
                        Some(r) => AttentionParams::init(d, r),
                        None => AttentionParams::zeros(d),
                    },
                    conv: match &mut rng {
                        Some(r) => ConvModuleParams::init(d, cfg.conv_kernel, r),
                        None => ConvModuleParams::zeros(d, cfg.conv_kernel),
                    },
                    ffn2: match &mut rng {
                        Some(r) => FfnParams::init(d, cfg.ffn_dim, r),
                        None => FfnParams::zeros(d, cfg.ffn_dim),
                    },
                    ln_out: NormParams::ones(d),
                }),
            });
        }
        Ok(EncoderParams {
            frontend,
            blocks,
            final_ln: NormParams::ones(d),
            head: linear(d, cfg.n_speakers, &mut rng),
        })
    }

    /// Parameter-shaped zero bundle for gradient accumulation.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, slice) in z.tensors_mut() {
            slice.fill(0.0);
        }
        z
    }

    /// Named tensors in the fixed visitation order.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        match &self.frontend {
            FrontendParams::Stacked { linear } => {
                out.push(("frontend.linear.w".into(), linear.w.data()));
                out.push(("frontend.linear.b".into(), &linear.b));
            }
            FrontendParams::Conv {
                layer1,
                layer2,
                linear,
            } => {
                for (i, l) in [layer1, layer2].into_iter().enumerate() {
                    out.push((format!("frontend.conv{}.dw", i + 1), l.dw.data()));
                    out.push((format!("frontend.conv{}.pw", i + 1), l.pw.data()));
                    out.push((format!("frontend.conv{}.pw_bias", i + 1), &l.pw_bias));
                }
                out.push(("frontend.linear.w".into(), linear.w.data()));
                out.push(("frontend.linear.b".into(), &linear.b));
            }
        }
        for (i, block) in self.blocks.iter().enumerate() {
            let p = |name: &str| format!("block{i}.{name}");
            match block {
                BlockParams::Transformer(b) => {
                    out.push((p("ln1.gain"), &b.ln1.gain));
                    out.push((p("ln1.bias"), &b.ln1.bias));
                    push_attention(&mut out, &p("attn"), &b.attn);
                    out.push((p("ln2.gain"), &b.ln2.gain));
                    out.push((p("ln2.bias"), &b.ln2.bias));
                    out.push((p("ffn.lin1.w"), b.lin1.w.data()));
                    out.push((p("ffn.lin1.b"), &b.lin1.b));
                    out.push((p("ffn.lin2.w"), b.lin2.w.data()));
                    out.push((p("ffn.lin2.b"), &b.lin2.b));
                }
                BlockParams::Conformer(b) => {
                    push_ffn(&mut out, &p("ffn1"), &b.ffn1);
                    out.push((p("attn_ln.gain"), &b.attn_ln.gain));
                    out.push((p("attn_ln.bias"), &b.attn_ln.bias));
                    push_attention(&mut out, &p("attn"), &b.attn);
                    out.push((p("conv.ln.gain"), &b.conv.ln.gain));
                    out.push((p("conv.ln.bias"), &b.conv.ln.bias));
                    out.push((p("conv.pw1.w"), b.conv.pw1.w.data()));
                    out.push((p("conv.pw1.b"), &b.conv.pw1.b));
                    out.push((p("conv.dw"), b.conv.dw.data()));
                    out.push((p("conv.dw_bias"), &b.conv.dw_bias));
                    out.push((p("conv.norm.gain"), &b.conv.norm.gain));
                    out.push((p("conv.norm.bias"), &b.conv.norm.bias));
                    out.push((p("conv.pw2.w"), b.conv.pw2.w.data()));
                    out.push((p("conv.pw2.b"), &b.conv.pw2.b));
                    push_ffn(&mut out, &p("ffn2"), &b.ffn2);
                    out.push((p("ln_out.gain"), &b.ln_out.gain));
                    out.push((p("ln_out.bias"), &b.ln_out.bias));
                }
            }
        }
        out.push(("final_ln.gain".into(), &self.final_ln.gain));
        out.push(("final_ln.bias".into(), &self.final_ln.bias));
        out.push(("head.w".into(), self.head.w.data()));
        out.push(("head.b".into(), &self.head.b));
        out
    }

    /// Mutable view in the same order as [`Self::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        match &mut self.frontend {
            FrontendParams::Stacked { linear } => {
                out.push(("frontend.linear.w".into(), linear.w.data_mut()));
                out.push(("frontend.linear.b".into(), &mut linear.b));
            }
            FrontendParams::Conv {
                layer1,
                layer2,
                linear,
            } => {
                for (i, l) in [layer1, layer2].into_iter().enumerate() {
                    out.push((format!("frontend.conv{}.dw", i + 1), l.dw.data_mut()));
                    out.push((format!("frontend.conv{}.pw", i + 1), l.pw.data_mut()));
                    out.push((format!("frontend.conv{}.pw_bias", i + 1), &mut l.pw_bias));
                }
                out.push(("frontend.linear.w".into(), linear.w.data_mut()));
                out.push(("frontend.linear.b".into(), &mut linear.b));
            }
        }
        for (i, block) in self.blocks.iter_mut().enumerate() {
            let p = |name: &str| format!("block{i}.{name}");
            match block {
                BlockParams::Transformer(b) => {
                    out.push((p("ln1.gain"), &mut b.ln1.gain));
                    out.push((p("ln1.bias"), &mut b.ln1.bias));
                    push_attention_mut(&mut out, &p("attn"), &mut b.attn);
                    out.push((p("ln2.gain"), &mut b.ln2.gain));
                    out.push((p("ln2.bias"), &mut b.ln2.bias));
                    out.push((p("ffn.lin1.w"), b.lin1.w.data_mut()));
                    out.push((p("ffn.lin1.b"), &mut b.lin1.b));
                    out.push((p("ffn.lin2.w"), b.lin2.w.data_mut()));
                    out.push((p("ffn.lin2.b"), &mut b.lin2.b));
                }
                BlockParams::Conformer(b) => {
                    push_ffn_mut(&mut out, &p("ffn1"), &mut b.ffn1);
                    out.push((p("attn_ln.gain"), &mut b.attn_ln.gain));
                    out.push((p("attn_ln.bias"), &mut b.attn_ln.bias));
                    push_attention_mut(&mut out, &p("attn"), &mut b.attn);
                    out.push((p("conv.ln.gain"), &mut b.conv.ln.gain));
                    out.push((p("conv.ln.bias"), &mut b.conv.ln.bias));
                    out.push((p("conv.pw1.w"), b.conv.pw1.w.data_mut()));
                    out.push((p("conv.pw1.b"), &mut b.conv.pw1.b));
                    out.push((p("conv.dw"), b.conv.dw.data_mut()));
                    out.push((p("conv.dw_bias"), &mut b.conv.dw_bias));
                    out.push((p("conv.norm.gain"), &mut b.conv.norm.gain));
                    out.push((p("conv.norm.bias"), &mut b.conv.norm.bias));
                    out.push((p("conv.pw2.w"), b.conv.pw2.w.data_mut()));
                    out.push((p("conv.pw2.b"), &mut b.conv.pw2.b));
                    push_ffn_mut(&mut out, &p("ffn2"), &mut b.ffn2);
                    out.push((p("ln_out.gain"), &mut b.ln_out.gain));
                    out.push((p("ln_out.bias"), &mut b.ln_out.bias));
                }
            }
        }
        out.push(("final_ln.gain".into(), &mut self.final_ln.gain));
        out.push(("final_ln.bias".into(), &mut self.final_ln.bias));
        out.push(("head.w".into(), self.head.w.data_mut()));
        out.push(("head.b".into(), &mut self.head.b));
        out
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|(_, s)| s.len()).sum()
    }

    pub fn to_flat_vec(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.n_params());
        for (_, s) in self.tensors() {
            flat.extend_from_slice(s);
        }
        flat
    }

    pub fn from_flat_slice(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::config(format!(
                "from_flat_slice: {} values for {} parameters",
                flat.len(),
                self.n_params()
            )));
        }
        let mut at = 0;
        for (_, s) in self.tensors_mut() {
            s.copy_from_slice(&flat[at..at + s.len()]);
            at += s.len();
        }
        Ok(())
    }

    /// grad-style elementwise accumulate: self += other.
    pub fn add_assign(&mut self, other: &EncoderParams) -> Result<()> {
        let theirs = other.tensors();
        for ((name, mine), (other_name, others)) in self.tensors_mut().iter_mut().zip(&theirs) {
            if name != other_name || mine.len() != others.len() {
                return Err(Error::internal(format!(
                    "parameter bundles disagree at {name} vs {other_name}"
                )));
            }
            for (m, o) in mine.iter_mut().zip(others.iter()) {
                *m += o;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, s) in self.tensors_mut() {
            for v in s.iter_mut() {
                *v *= factor;
            }
        }
    }
}

fn push_attention<'a>(out: &mut Vec<(String, &'a [f64])>, prefix: &str, a: &'a AttentionParams) {
    for (tag, lin) in [("wq", &a.wq), ("wk", &a.wk), ("wv", &a.wv), ("wo", &a.wo)] {
        out.push((format!("{prefix}.{tag}.w"), lin.w.data()));
        out.push((format!("{prefix}.{tag}.b"), &lin.b));
    }
}

fn push_attention_mut<'a>(
    out: &mut Vec<(String, &'a mut [f64])>,
    prefix: &str,
    a: &'a mut AttentionParams,
) {
    let AttentionParams { wq, wk, wv, wo } = a;
    for (tag, lin) in [("wq", wq), ("wk", wk), ("wv", wv), ("wo", wo)] {
        out.push((format!("{prefix}.{tag}.w"), lin.w.data_mut()));
        out.push((format!("{prefix}.{tag}.b"), &mut lin.b));
    }
}

fn push_ffn<'a>(out: &mut Vec<(String, &'a [f64])>, prefix: &str, f: &'a FfnParams) {
    out.push((format!("{prefix}.ln.gain"), &f.ln.gain));
    out.push((format!("{prefix}.ln.bias"), &f.ln.bias));
    out.push((format!("{prefix}.lin1.w"), f.lin1.w.data()));
    out.push((format!("{prefix}.lin1.b"), &f.lin1.b));
    out.push((format!("{prefix}.lin2.w"), f.lin2.w.data()));
    out.push((format!("{prefix}.lin2.b"), &f.lin2.b));
}

fn push_ffn_mut<'a>(out: &mut Vec<(String, &'a mut [f64])>, prefix: &str, f: &'a mut FfnParams) {
    let FfnParams { ln, lin1, lin2 } = f;
    out.push((format!("{prefix}.ln.gain"), &mut ln.gain));
    out.push((format!("{prefix}.ln.bias"), &mut ln.bias));
    out.push((format!("{prefix}.lin1.w"), lin1.w.data_mut()));
    out.push((format!("{prefix}.lin1.b"), &mut lin1.b));
    out.push((format!("{prefix}.lin2.w"), lin2.w.data_mut()));
    out.push((format!("{prefix}.lin2.b"), &mut lin2.b));
}
