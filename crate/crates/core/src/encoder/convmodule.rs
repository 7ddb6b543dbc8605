//! Conformer convolution module: layer norm, pointwise expansion to 2D with
//! a GLU gate, depthwise temporal convolution with bias, per-channel
//! scale+shift normalization over time (the batch-independent stand-in for
//! batch norm), swish, and a pointwise projection back to D.

use crate::encoder::layers::{
    depthwise1d_backward, depthwise1d_forward, glu_backward, swish_backward, RowNormCache,
};
use crate::encoder::params::ConvModuleParams;
use crate::error::Result;
use crate::numerics::{glu, swish, Matrix};

pub(crate) struct ConvModuleCache {
    ln: RowNormCache,
    /// Layer-norm output, the pointwise-expansion input.
    u: Matrix,
    /// Pointwise expansion output (T x 2D) before the GLU gate.
    glu_pre: Matrix,
    /// Gated activations (T x D), the depthwise-conv input.
    glu_out: Matrix,
    norm: RowNormCache,
    /// Channel-norm output, the swish input.
    swish_pre: Matrix,
    /// Swish output, the final pointwise input.
    swish_out: Matrix,
}

pub(crate) fn conv_module_forward(
    params: &ConvModuleParams,
    x: &Matrix,
) -> Result<(Matrix, ConvModuleCache)> {
    let (u, ln) = params.ln.forward_rows(x)?;
    let glu_pre = crate::numerics::matmul(&u, &params.pw1.w)?.add_row_broadcast(&params.pw1.b)?;
    let glu_out = glu(&glu_pre)?;
    let conv_out = depthwise1d_forward(&glu_out, &params.dw, &params.dw_bias)?;
    let (swish_pre, norm) = params.norm.forward_channels(&conv_out)?;
    let swish_out = swish_pre.map(swish);
    let y =
        crate::numerics::matmul(&swish_out, &params.pw2.w)?.add_row_broadcast(&params.pw2.b)?;
    Ok((
        y,
        ConvModuleCache {
            ln,
            u,
            glu_pre,
            glu_out,
            norm,
            swish_pre,
            swish_out,
        },
    ))
}

pub(crate) fn conv_module_backward(
    params: &ConvModuleParams,
    cache: &ConvModuleCache,
    dy: &Matrix,
    grad: &mut ConvModuleParams,
) -> Result<Matrix> {
    let d_swish_out = params.pw2.backward_from(&cache.swish_out, dy, &mut grad.pw2)?;
    let d_swish_pre = swish_backward(&cache.swish_pre, &d_swish_out);
    let d_conv_out = params
        .norm
        .backward_channels(&cache.norm, &d_swish_pre, &mut grad.norm)?;
    let d_glu_out = depthwise1d_backward(
        &params.dw,
        &cache.glu_out,
        &d_conv_out,
        &mut grad.dw,
        &mut grad.dw_bias,
    )?;
    let d_glu_pre = glu_backward(&cache.glu_pre, &d_glu_out);
    let d_u = params.pw1.backward_from(&cache.u, &d_glu_pre, &mut grad.pw1)?;
    params.ln.backward_rows(&cache.ln, &d_u, &mut grad.ln)
}
