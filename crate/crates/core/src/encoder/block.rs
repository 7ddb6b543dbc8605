//! Encoder blocks.
//!
//! Transformer block (pre-norm residuals, no positional encoding):
//!   e'  = e  + MHSA(LN1(e))
//!   out = e' + Lin2(ReLU(Lin1(LN2(e'))))
//!
//! Conformer block (macaron feed-forwards at half weight):
//!   h1  = e  + 0.5 * FFN(e)
//!   h2  = h1 + MHSA(LN(h1))
//!   h3  = h2 + ConvModule(h2)
//!   out = LN(h3 + 0.5 * FFN(h3))
//! where FFN(x) = Lin2(Swish(Lin1(LN(x)))).

use crate::encoder::attention::{mhsa_backward, mhsa_forward, AttnCache};
use crate::encoder::convmodule::{conv_module_backward, conv_module_forward, ConvModuleCache};
use crate::encoder::layers::{relu_backward, swish_backward, RowNormCache};
use crate::encoder::params::{BlockParams, ConformerBlockParams, FfnParams, TransformerBlockParams};
use crate::error::{Error, Result};
use crate::numerics::{matmul, relu, swish, Matrix};

pub struct TransformerBlockCache {
    ln1: RowNormCache,
    attn: AttnCache,
    ln2: RowNormCache,
    /// LN2 output, the first feed-forward input.
    ln2_out: Matrix,
    /// First feed-forward output, pre-ReLU.
    relu_pre: Matrix,
    /// ReLU output, the second feed-forward input.
    relu_out: Matrix,
}

struct FfnCache {
    ln: RowNormCache,
    /// LN output, the expansion input.
    u: Matrix,
    swish_pre: Matrix,
    swish_out: Matrix,
}

pub struct ConformerBlockCache {
    ffn1: FfnCache,
    attn_ln: RowNormCache,
    attn: AttnCache,
    conv: ConvModuleCache,
    ffn2: FfnCache,
    ln_out: RowNormCache,
}

pub enum BlockCache {
    Transformer(TransformerBlockCache),
    Conformer(ConformerBlockCache),
}

fn ffn_forward(p: &FfnParams, x: &Matrix) -> Result<(Matrix, FfnCache)> {
    let (u, ln) = p.ln.forward_rows(x)?;
    let swish_pre = matmul(&u, &p.lin1.w)?.add_row_broadcast(&p.lin1.b)?;
    let swish_out = swish_pre.map(swish);
    let y = matmul(&swish_out, &p.lin2.w)?.add_row_broadcast(&p.lin2.b)?;
    Ok((
        y,
        FfnCache {
            ln,
            u,
            swish_pre,
            swish_out,
        },
    ))
}

fn ffn_backward(
    p: &FfnParams,
    cache: &FfnCache,
    dy: &Matrix,
    grad: &mut FfnParams,
) -> Result<Matrix> {
    let d_swish_out = p.lin2.backward_from(&cache.swish_out, dy, &mut grad.lin2)?;
    let d_swish_pre = swish_backward(&cache.swish_pre, &d_swish_out);
    let d_u = p.lin1.backward_from(&cache.u, &d_swish_pre, &mut grad.lin1)?;
    p.ln.backward_rows(&cache.ln, &d_u, &mut grad.ln)
}

fn transformer_forward(
    p: &TransformerBlockParams,
    x: &Matrix,
    n_heads: usize,
) -> Result<(Matrix, TransformerBlockCache)> {
    let (u, ln1) = p.ln1.forward_rows(x)?;
    let (attn_out, attn) = mhsa_forward(&p.attn, &u, n_heads)?;
    let e_mid = x.add(&attn_out)?;
    let (ln2_out, ln2) = p.ln2.forward_rows(&e_mid)?;
    let relu_pre = matmul(&ln2_out, &p.lin1.w)?.add_row_broadcast(&p.lin1.b)?;
    let relu_out = relu_pre.map(relu);
    let ffn_out = matmul(&relu_out, &p.lin2.w)?.add_row_broadcast(&p.lin2.b)?;
    let y = e_mid.add(&ffn_out)?;
    Ok((
        y,
        TransformerBlockCache {
            ln1,
            attn,
            ln2,
            ln2_out,
            relu_pre,
            relu_out,
        },
    ))
}

fn transformer_backward(
    p: &TransformerBlockParams,
    cache: &TransformerBlockCache,
    dy: &Matrix,
    n_heads: usize,
    grad: &mut TransformerBlockParams,
) -> Result<Matrix> {
    // out = e_mid + FFN(LN2(e_mid))
    let d_relu_out = p.lin2.backward_from(&cache.relu_out, dy, &mut grad.lin2)?;
    let d_relu_pre = relu_backward(&cache.relu_pre, &d_relu_out);
    let d_ln2_out = p.lin1.backward_from(&cache.ln2_out, &d_relu_pre, &mut grad.lin1)?;
    let d_e_mid = dy.add(&p.ln2.backward_rows(&cache.ln2, &d_ln2_out, &mut grad.ln2)?)?;
    // e_mid = x + MHSA(LN1(x))
    let d_u = mhsa_backward(&p.attn, &cache.attn, &d_e_mid, n_heads, &mut grad.attn)?;
    d_e_mid.add(&p.ln1.backward_rows(&cache.ln1, &d_u, &mut grad.ln1)?)
}

fn conformer_forward(
    p: &ConformerBlockParams,
    x: &Matrix,
    n_heads: usize,
) -> Result<(Matrix, ConformerBlockCache)> {
    let (f1, ffn1) = ffn_forward(&p.ffn1, x)?;
    let h1 = x.add(&f1.scale(0.5))?;
    let (u, attn_ln) = p.attn_ln.forward_rows(&h1)?;
    let (attn_out, attn) = mhsa_forward(&p.attn, &u, n_heads)?;
    let h2 = h1.add(&attn_out)?;
    let (conv_out, conv) = conv_module_forward(&p.conv, &h2)?;
    let h3 = h2.add(&conv_out)?;
    let (f2, ffn2) = ffn_forward(&p.ffn2, &h3)?;
    let pre_ln = h3.add(&f2.scale(0.5))?;
    let (y, ln_out) = p.ln_out.forward_rows(&pre_ln)?;
    Ok((
        y,
        ConformerBlockCache {
            ffn1,
            attn_ln,
            attn,
            conv,
            ffn2,
            ln_out,
        },
    ))
}

fn conformer_backward(
    p: &ConformerBlockParams,
    cache: &ConformerBlockCache,
    dy: &Matrix,
    n_heads: usize,
    grad: &mut ConformerBlockParams,
) -> Result<Matrix> {
    // out = LN(h3 + 0.5 f2)
    let d_pre_ln = p
        .ln_out
        .backward_rows(&cache.ln_out, dy, &mut grad.ln_out)?;
    let d_f2 = d_pre_ln.scale(0.5);
    let d_h3 = d_pre_ln.add(&ffn_backward(&p.ffn2, &cache.ffn2, &d_f2, &mut grad.ffn2)?)?;
    // h3 = h2 + ConvModule(h2)
    let d_h2 = d_h3.add(&conv_module_backward(&p.conv, &cache.conv, &d_h3, &mut grad.conv)?)?;
    // h2 = h1 + MHSA(LN(h1))
    let d_u = mhsa_backward(&p.attn, &cache.attn, &d_h2, n_heads, &mut grad.attn)?;
    let d_h1 = d_h2.add(&p
        .attn_ln
        .backward_rows(&cache.attn_ln, &d_u, &mut grad.attn_ln)?)?;
    // h1 = x + 0.5 FFN(x)
    let d_f1 = d_h1.scale(0.5);
    d_h1.add(&ffn_backward(&p.ffn1, &cache.ffn1, &d_f1, &mut grad.ffn1)?)
}

pub fn block_forward(
    params: &BlockParams,
    x: &Matrix,
    n_heads: usize,
) -> Result<(Matrix, BlockCache)> {
    match params {
        BlockParams::Transformer(p) => {
            let (y, c) = transformer_forward(p, x, n_heads)?;
            Ok((y, BlockCache::Transformer(c)))
        }
        BlockParams::Conformer(p) => {
            let (y, c) = conformer_forward(p, x, n_heads)?;
            Ok((y, BlockCache::Conformer(c)))
        }
    }
}

pub(crate) fn block_backward(
    params: &BlockParams,
    cache: &BlockCache,
    dy: &Matrix,
    n_heads: usize,
    grad: &mut BlockParams,
) -> Result<Matrix> {
    match (params, cache, grad) {
        (BlockParams::Transformer(p), BlockCache::Transformer(c), BlockParams::Transformer(g)) => {
            transformer_backward(p, c, dy, n_heads, g)
        }
        (BlockParams::Conformer(p), BlockCache::Conformer(c), BlockParams::Conformer(g)) => {
            conformer_backward(p, c, dy, n_heads, g)
        }
        _ => Err(Error::internal(
            "block cache or gradient bundle does not match the parameters".to_string(),
        )),
    }
}
