//! Forward/backward pairs for the primitive layers. Every backward here
//! is a hand-derived reverse-mode rule, validated as a whole against
//! central finite differences in the model tests.

use crate::encoder::params::{Linear, NormParams};
use crate::error::Result;
use crate::numerics::{conv1d_depthwise, Matrix};

pub const NORM_EPS: f64 = 1e-5;

// ---------------------------------------------------------------- linear

impl Linear {
    /// Accumulates dW, db into `grad` and returns dx; `x` is the forward
    /// input.
    pub(crate) fn backward_from(
        &self,
        x: &Matrix,
        dy: &Matrix,
        grad: &mut Linear,
    ) -> Result<Matrix> {
        grad.w
            .add_assign(&crate::numerics::matmul(&x.transpose(), dy)?);
        for (g, s) in grad.b.iter_mut().zip(dy.col_sums()) {
            *g += s;
        }
        crate::numerics::matmul(dy, &self.w.transpose())
    }
}

// ------------------------------------------------------- row layer norm

pub(crate) struct RowNormCache {
    /// Normalized rows before gain/bias.
    pub xhat: Matrix,
    pub inv_sigma: Vec<f64>,
}

impl NormParams {
    /// Per-row zero-mean unit-variance (biased estimator) + affine.
    pub(crate) fn forward_rows(&self, x: &Matrix) -> Result<(Matrix, RowNormCache)> {
        let (t_len, d) = (x.rows(), x.cols());
        let mut xhat = Matrix::zeros(t_len, d);
        let mut inv_sigma = vec![0.0; t_len];
        let mut y = Matrix::zeros(t_len, d);
        for t in 0..t_len {
            let row = x.row(t);
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let inv = 1.0 / (var + NORM_EPS).sqrt();
            inv_sigma[t] = inv;
            for c in 0..d {
                let h = (row[c] - mean) * inv;
                xhat.set(t, c, h);
                y.set(t, c, self.gain[c] * h + self.bias[c]);
            }
        }
        Ok((y, RowNormCache { xhat, inv_sigma }))
    }

    pub(crate) fn backward_rows(
        &self,
        cache: &RowNormCache,
        dy: &Matrix,
        grad: &mut NormParams,
    ) -> Result<Matrix> {
        let (t_len, d) = (dy.rows(), dy.cols());
        let mut dx = Matrix::zeros(t_len, d);
        for t in 0..t_len {
            let mut sum_dxhat = 0.0;
            let mut sum_dxhat_xhat = 0.0;
            for c in 0..d {
                let g = dy.get(t, c);
                let h = cache.xhat.get(t, c);
                grad.gain[c] += g * h;
                grad.bias[c] += g;
                let dxhat = g * self.gain[c];
                sum_dxhat += dxhat;
                sum_dxhat_xhat += dxhat * h;
            }
            let inv_d = 1.0 / d as f64;
            for c in 0..d {
                let dxhat = dy.get(t, c) * self.gain[c];
                let h = cache.xhat.get(t, c);
                dx.set(
                    t,
                    c,
                    cache.inv_sigma[t] * (dxhat - inv_d * sum_dxhat - h * inv_d * sum_dxhat_xhat),
                );
            }
        }
        Ok(dx)
    }

    /// Per-channel zero-mean unit-variance over the time axis + affine:
    /// the batch-independent stand-in for batch normalization inside the
    /// convolution module.
    pub(crate) fn forward_channels(&self, x: &Matrix) -> Result<(Matrix, RowNormCache)> {
        let (t_len, d) = (x.rows(), x.cols());
        let mut xhat = Matrix::zeros(t_len, d);
        let mut inv_sigma = vec![0.0; d];
        let mut y = Matrix::zeros(t_len, d);
        for c in 0..d {
            let mut mean = 0.0;
            for t in 0..t_len {
                mean += x.get(t, c);
            }
            mean /= t_len as f64;
            let mut var = 0.0;
            for t in 0..t_len {
                let v = x.get(t, c) - mean;
                var += v * v;
            }
            var /= t_len as f64;
            let inv = 1.0 / (var + NORM_EPS).sqrt();
            inv_sigma[c] = inv;
            for t in 0..t_len {
                let h = (x.get(t, c) - mean) * inv;
                xhat.set(t, c, h);
                y.set(t, c, self.gain[c] * h + self.bias[c]);
            }
        }
        Ok((y, RowNormCache { xhat, inv_sigma }))
    }

    pub(crate) fn backward_channels(
        &self,
        cache: &RowNormCache,
        dy: &Matrix,
        grad: &mut NormParams,
    ) -> Result<Matrix> {
        let (t_len, d) = (dy.rows(), dy.cols());
        let mut dx = Matrix::zeros(t_len, d);
        for c in 0..d {
            let mut sum_dxhat = 0.0;
            let mut sum_dxhat_xhat = 0.0;
            for t in 0..t_len {
                let g = dy.get(t, c);
                let h = cache.xhat.get(t, c);
                grad.gain[c] += g * h;
                grad.bias[c] += g;
                let dxhat = g * self.gain[c];
                sum_dxhat += dxhat;
                sum_dxhat_xhat += dxhat * h;
            }
            let inv_t = 1.0 / t_len as f64;
            for t in 0..t_len {
                let dxhat = dy.get(t, c) * self.gain[c];
                let h = cache.xhat.get(t, c);
                dx.set(
                    t,
                    c,
                    cache.inv_sigma[c] * (dxhat - inv_t * sum_dxhat - h * inv_t * sum_dxhat_xhat),
                );
            }
        }
        Ok(dx)
    }
}

// ---------------------------------------------------------- activations

pub(crate) fn relu_backward(pre: &Matrix, dy: &Matrix) -> Matrix {
    Matrix::from_fn(dy.rows(), dy.cols(), |t, c| {
        if pre.get(t, c) > 0.0 {
            dy.get(t, c)
        } else {
            0.0
        }
    })
}

pub(crate) fn swish_backward(pre: &Matrix, dy: &Matrix) -> Matrix {
    Matrix::from_fn(dy.rows(), dy.cols(), |t, c| {
        let x = pre.get(t, c);
        let s = 1.0 / (1.0 + (-x).exp());
        dy.get(t, c) * s * (1.0 + x * (1.0 - s))
    })
}

/// glu(a || g) = a * sigmoid(g); returns d(a || g) from d(out).
pub(crate) fn glu_backward(pre: &Matrix, dy: &Matrix) -> Matrix {
    let half = pre.cols() / 2;
    Matrix::from_fn(pre.rows(), pre.cols(), |t, c| {
        if c < half {
            let s = 1.0 / (1.0 + (-pre.get(t, c + half)).exp());
            dy.get(t, c) * s
        } else {
            let a = pre.get(t, c - half);
            let s = 1.0 / (1.0 + (-pre.get(t, c)).exp());
            dy.get(t, c - half) * a * s * (1.0 - s)
        }
    })
}

// ------------------------------------------------- depthwise conv (1-D)

/// Per-channel conv along time (same padding) plus a per-channel bias.
pub(crate) fn depthwise1d_forward(x: &Matrix, kernel: &Matrix, bias: &[f64]) -> Result<Matrix> {
    conv1d_depthwise(x, kernel)?.add_row_broadcast(bias)
}

pub(crate) fn depthwise1d_backward(
    kernel: &Matrix,
    x: &Matrix,
    dy: &Matrix,
    grad_kernel: &mut Matrix,
    grad_bias: &mut [f64],
) -> Result<Matrix> {
    let (t_len, channels) = (x.rows(), x.cols());
    let k = kernel.cols();
    let left = (k - 1) / 2;
    let mut dx = Matrix::zeros(t_len, channels);
    for c in 0..channels {
        let mut db = 0.0;
        for t in 0..t_len {
            let g = dy.get(t, c);
            db += g;
            for tap in 0..k {
                let src = t as isize + tap as isize - left as isize;
                if src >= 0 && (src as usize) < t_len {
                    let src = src as usize;
                    grad_kernel.set(c, tap, grad_kernel.get(c, tap) + g * x.get(src, c));
                    dx.set(src, c, dx.get(src, c) + g * kernel.get(c, tap));
                }
            }
        }
        grad_bias[c] += db;
    }
    Ok(dx)
}
