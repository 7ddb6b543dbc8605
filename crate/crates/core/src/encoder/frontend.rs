//! Frontends that turn 10 ms log-mel frames into 100 ms encoder inputs.
//!
//! Both arrive at T' = ceil(T/10) rows of D model dims:
//! * `Stacked`: 15-frame context stacking + decimation, then one linear map.
//! * `ConvSubsample`: two strided depthwise-separable conv layers with ReLU
//!   (time strides 2 then 5), flattened and linearly projected.
//!
//! No gradient flows into the features themselves; backward stops at the
//! first layer's parameters.

use crate::encoder::config::{EncoderConfig, Frontend};
use crate::encoder::params::{ConvLayerParams, FrontendParams};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::numerics::{depthwise_conv2d, matmul, pointwise_mix, Grid3, Matrix};

pub(crate) enum FrontendCache {
    Stacked {
        /// T' x 15F stacked features, the linear input.
        stacked: Matrix,
    },
    Conv {
        x0: Grid3,
        /// Depthwise output of layer 1 (pointwise input).
        s1: Grid3,
        /// Pointwise output of layer 1, pre-ReLU.
        p1: Grid3,
        /// ReLU output of layer 1 (layer-2 input).
        a1: Grid3,
        s2: Grid3,
        p2: Grid3,
        /// Flattened ReLU output of layer 2, the linear input.
        flat: Matrix,
    },
}

fn relu_grid(x: &Grid3) -> Grid3 {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

fn relu_grid_backward(pre: &Grid3, dy: &Grid3) -> Grid3 {
    let mut out = dy.clone();
    for (o, &p) in out.data_mut().iter_mut().zip(pre.data()) {
        if p <= 0.0 {
            *o = 0.0;
        }
    }
    out
}

struct ConvGeometry {
    k: usize,
    stride_t: usize,
    stride_f: usize,
}

fn geometry(cfg: &EncoderConfig) -> Result<(ConvGeometry, ConvGeometry)> {
    let (sf1, sf2) = cfg.frontend_freq_strides()?;
    Ok((
        ConvGeometry {
            k: 3,
            stride_t: 2,
            stride_f: sf1,
        },
        ConvGeometry {
            k: 7,
            stride_t: 5,
            stride_f: sf2,
        },
    ))
}

fn conv_layer_forward(
    layer: &ConvLayerParams,
    geo: &ConvGeometry,
    x: &Grid3,
) -> (Grid3, Grid3, Grid3) {
    let s = depthwise_conv2d(x, &layer.dw, geo.k, geo.k, geo.stride_t, geo.stride_f);
    let p = pointwise_mix(&s, &layer.pw, &layer.pw_bias);
    let a = relu_grid(&p);
    (s, p, a)
}

/// dx of the pointwise 1x1 mix; accumulates dW and db.
fn pointwise_backward(
    x: &Grid3,
    pw: &Matrix,
    dy: &Grid3,
    gpw: &mut Matrix,
    gb: &mut [f64],
) -> Grid3 {
    let mut dx = Grid3::zeros(x.t, x.f, x.c);
    for t in 0..x.t {
        for f in 0..x.f {
            for o in 0..pw.cols() {
                let g = dy.get(t, f, o);
                gb[o] += g;
                for c in 0..x.c {
                    gpw.set(c, o, gpw.get(c, o) + g * x.get(t, f, c));
                    dx.add(t, f, c, g * pw.get(c, o));
                }
            }
        }
    }
    dx
}

/// dx of the strided depthwise conv; accumulates the tap gradients.
fn depthwise2d_backward(
    x: &Grid3,
    kernel: &Matrix,
    geo: &ConvGeometry,
    dy: &Grid3,
    gk: &mut Matrix,
) -> Grid3 {
    let pad_t = crate::numerics::same_pad_before(x.t, geo.k, geo.stride_t) as isize;
    let pad_f = crate::numerics::same_pad_before(x.f, geo.k, geo.stride_f) as isize;
    let mut dx = Grid3::zeros(x.t, x.f, x.c);
    for ot in 0..dy.t {
        for of in 0..dy.f {
            for c in 0..x.c {
                let g = dy.get(ot, of, c);
                if g == 0.0 {
                    continue;
                }
                for kt in 0..geo.k {
                    let st = (ot * geo.stride_t + kt) as isize - pad_t;
                    if st < 0 || st as usize >= x.t {
                        continue;
                    }
                    for kf in 0..geo.k {
                        let sf = (of * geo.stride_f + kf) as isize - pad_f;
                        if sf < 0 || sf as usize >= x.f {
                            continue;
                        }
                        let tap = kt * geo.k + kf;
                        let xv = x.get(st as usize, sf as usize, c);
                        gk.set(c, tap, gk.get(c, tap) + g * xv);
                        dx.add(st as usize, sf as usize, c, g * kernel.get(c, tap));
                    }
                }
            }
        }
    }
    dx
}

pub(crate) fn frontend_forward(
    params: &FrontendParams,
    cfg: &EncoderConfig,
    feats: &Matrix,
) -> Result<(Matrix, FrontendCache)> {
    if feats.cols() != cfg.input_dims {
        return Err(Error::input(format!(
            "frontend: features have {} dims, config expects {}",
            feats.cols(),
            cfg.input_dims
        )));
    }
    if feats.rows() == 0 {
        return Err(Error::input("frontend: empty feature matrix".to_string()));
    }
    match (params, cfg.frontend) {
        (FrontendParams::Stacked { linear }, Frontend::Stacked) => {
            let stacked = crate::features::stack_and_decimate(&FeatureMatrix {
                data: feats.clone(),
                frame_shift: 0.010,
            })
            .data;
            let y = matmul(&stacked, &linear.w)?.add_row_broadcast(&linear.b)?;
            Ok((y, FrontendCache::Stacked { stacked }))
        }
        (
            FrontendParams::Conv {
                layer1,
                layer2,
                linear,
            },
            Frontend::ConvSubsample,
        ) => {
            let (geo1, geo2) = geometry(cfg)?;
            let x0 = Grid3::from_matrix(feats);
            let (s1, p1, a1) = conv_layer_forward(layer1, &geo1, &x0);
            let (s2, p2, a2) = conv_layer_forward(layer2, &geo2, &a1);
            let flat = a2.flatten_frames();
            let y = matmul(&flat, &linear.w)?.add_row_broadcast(&linear.b)?;
            Ok((
                y,
                FrontendCache::Conv {
                    x0,
                    s1,
                    p1,
                    a1,
                    s2,
                    p2,
                    flat,
                },
            ))
        }
        _ => Err(Error::internal(
            "frontend parameters do not match the configured frontend".to_string(),
        )),
    }
}

pub(crate) fn frontend_backward(
    params: &FrontendParams,
    cfg: &EncoderConfig,
    cache: &FrontendCache,
    dy: &Matrix,
    grad: &mut FrontendParams,
) -> Result<()> {
    match (params, cache, grad) {
        (
            FrontendParams::Stacked { linear },
            FrontendCache::Stacked { stacked },
            FrontendParams::Stacked { linear: glin },
        ) => {
            linear.backward_from(stacked, dy, glin)?;
            Ok(())
        }
        (
            FrontendParams::Conv {
                layer1,
                layer2,
                linear,
            },
            FrontendCache::Conv {
                x0,
                s1,
                p1,
                a1,
                s2,
                p2,
                flat,
            },
            FrontendParams::Conv {
                layer1: g1,
                layer2: g2,
                linear: glin,
            },
        ) => {
            let (geo1, geo2) = geometry(cfg)?;
            let d_flat = linear.backward_from(flat, dy, glin)?;
            let mut d_a2 = Grid3::zeros(p2.t, p2.f, p2.c);
            d_a2.data_mut().copy_from_slice(d_flat.data());
            let d_p2 = relu_grid_backward(p2, &d_a2);
            let d_s2 = pointwise_backward(s2, &layer2.pw, &d_p2, &mut g2.pw, &mut g2.pw_bias);
            let d_a1 = depthwise2d_backward(a1, &layer2.dw, &geo2, &d_s2, &mut g2.dw);
            let d_p1 = relu_grid_backward(p1, &d_a1);
            let d_s1 = pointwise_backward(s1, &layer1.pw, &d_p1, &mut g1.pw, &mut g1.pw_bias);
            // dx into the raw features is discarded; only tap grads matter.
            let _ = depthwise2d_backward(x0, &layer1.dw, &geo1, &d_s1, &mut g1.dw);
            Ok(())
        }
        _ => Err(Error::internal(
            "frontend gradient bundle does not match the parameters".to_string(),
        )),
    }
}
