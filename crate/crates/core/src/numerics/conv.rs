//! Convolution primitives: depthwise 1-D over time and depthwise-separable
//! 2-D over (time, frequency) grids.
//!
//! Padding conventions, fixed once and tested:
//! * 1-D "same": (K-1)/2 zeros on the left, the remaining K-1-(K-1)/2 on the
//!   right, output length equals input length (stride 1).
//! * 2-D "same" with stride: output length is ceil(in/stride); the total
//!   padding max((out-1)*stride + k - in, 0) splits as total/2 on the
//!   leading side, remainder trailing.

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Leading-side padding for the strided 2-D "same" convention.
pub fn same_pad_before(input: usize, kernel: usize, stride: usize) -> usize {
    let out = input.div_ceil(stride);
    let total = ((out - 1) * stride + kernel).saturating_sub(input);
    total / 2
}

/// Per-channel 1-D convolution along time, stride 1, zero-padded so the
/// output has the same number of frames.
///
/// `x` is T x C (time-major), `kernel` is C x K: row c holds channel c's taps.
pub fn conv1d_depthwise(x: &Matrix, kernel: &Matrix) -> Result<Matrix> {
    if kernel.rows() != x.cols() {
        return Err(Error::config(format!(
            "conv1d_depthwise: kernel has {} channels, input has {}",
            kernel.rows(),
            x.cols()
        )));
    }
    let k = kernel.cols();
    if k == 0 {
        return Err(Error::config("conv1d_depthwise: empty kernel".to_string()));
    }
    let t_len = x.rows();
    let left = (k - 1) / 2;
    let mut out = Matrix::zeros(t_len, x.cols());
    for t in 0..t_len {
        for c in 0..x.cols() {
            let mut acc = 0.0;
            for tap in 0..k {
                let src = t as isize + tap as isize - left as isize;
                if src >= 0 && (src as usize) < t_len {
                    acc += x.get(src as usize, c) * kernel.get(c, tap);
                }
            }
            out.set(t, c, acc);
        }
    }
    Ok(out)
}

/// Dense (time, freq, channel) grid, time-major then freq then channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3 {
    pub t: usize,
    pub f: usize,
    pub c: usize,
    data: Vec<f64>,
}

impl Grid3 {
    pub fn zeros(t: usize, f: usize, c: usize) -> Self {
        Grid3 {
            t,
            f,
            c,
            data: vec![0.0; t * f * c],
        }
    }

    /// Single-channel grid from a T x F matrix.
    pub fn from_matrix(m: &Matrix) -> Self {
        Grid3 {
            t: m.rows(),
            f: m.cols(),
            c: 1,
            data: m.data().to_vec(),
        }
    }

    #[inline]
    pub fn get(&self, t: usize, f: usize, c: usize) -> f64 {
        self.data[(t * self.f + f) * self.c + c]
    }

    #[inline]
    pub fn set(&mut self, t: usize, f: usize, c: usize, v: f64) {
        self.data[(t * self.f + f) * self.c + c] = v;
    }

    #[inline]
    pub fn add(&mut self, t: usize, f: usize, c: usize, v: f64) {
        self.data[(t * self.f + f) * self.c + c] += v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid3 {
        Grid3 {
            t: self.t,
            f: self.f,
            c: self.c,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Flatten each time step to a row of f*c values (freq-major, then
    /// channel), yielding a T x (F*C) matrix.
    pub fn flatten_frames(&self) -> Matrix {
        Matrix::from_vec(self.t, self.f * self.c, self.data.clone())
            .expect("grid storage is t*(f*c) by construction")
    }
}

/// Depthwise spatial convolution (one k_t x k_f kernel per input channel,
/// strided, "same"-padded) followed by a 1x1 pointwise channel mix.
///
/// `depthwise` is C_in x (k_t*k_f), row-major taps; `pointwise` is
/// C_in x C_out; `pointwise_bias` has length C_out.
pub fn conv2d_depthwise_separable(
    x: &Grid3,
    depthwise: &Matrix,
    k_t: usize,
    k_f: usize,
    pointwise: &Matrix,
    pointwise_bias: &[f64],
    stride_t: usize,
    stride_f: usize,
) -> Result<Grid3> {
    if stride_t == 0 || stride_f == 0 {
        return Err(Error::config("conv2d: strides must be >= 1".to_string()));
    }
    if depthwise.rows() != x.c || depthwise.cols() != k_t * k_f {
        return Err(Error::config(format!(
            "conv2d: depthwise kernel {}x{} does not match {} channels x {}x{} taps",
            depthwise.rows(),
            depthwise.cols(),
            x.c,
            k_t,
            k_f
        )));
    }
    if pointwise.rows() != x.c {
        return Err(Error::config(format!(
            "conv2d: pointwise expects {} input channels, grid has {}",
            pointwise.rows(),
            x.c
        )));
    }
    if pointwise_bias.len() != pointwise.cols() {
        return Err(Error::config(format!(
            "conv2d: pointwise bias length {} vs {} output channels",
            pointwise_bias.len(),
            pointwise.cols()
        )));
    }
    let spatial = depthwise_conv2d(x, depthwise, k_t, k_f, stride_t, stride_f);
    Ok(pointwise_mix(&spatial, pointwise, pointwise_bias))
}

pub(crate) fn depthwise_conv2d(
    x: &Grid3,
    kernel: &Matrix,
    k_t: usize,
    k_f: usize,
    stride_t: usize,
    stride_f: usize,
) -> Grid3 {
    let out_t = x.t.div_ceil(stride_t);
    let out_f = x.f.div_ceil(stride_f);
    let pad_t = same_pad_before(x.t, k_t, stride_t) as isize;
    let pad_f = same_pad_before(x.f, k_f, stride_f) as isize;
    let mut out = Grid3::zeros(out_t, out_f, x.c);
    for ot in 0..out_t {
        for of in 0..out_f {
            for c in 0..x.c {
                let mut acc = 0.0;
                for kt in 0..k_t {
                    let st = (ot * stride_t + kt) as isize - pad_t;
                    if st < 0 || st as usize >= x.t {
                        continue;
                    }
                    for kf in 0..k_f {
                        let sf = (of * stride_f + kf) as isize - pad_f;
                        if sf < 0 || sf as usize >= x.f {
                            continue;
                        }
                        acc += x.get(st as usize, sf as usize, c) * kernel.get(c, kt * k_f + kf);
                    }
                }
                out.set(ot, of, c, acc);
            }
        }
    }
    out
}

pub(crate) fn pointwise_mix(x: &Grid3, pointwise: &Matrix, bias: &[f64]) -> Grid3 {
    let c_out = pointwise.cols();
    let mut out = Grid3::zeros(x.t, x.f, c_out);
    for t in 0..x.t {
        for f in 0..x.f {
            for o in 0..c_out {
                let mut acc = bias[o];
                for c in 0..x.c {
                    acc += x.get(t, f, c) * pointwise.get(c, o);
                }
                out.set(t, f, o, acc);
            }
        }
    }
    out
}
