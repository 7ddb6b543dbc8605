//! Multi-head scaled dot-product self-attention over the whole sequence.
//! No positional encoding anywhere: together with permutation-equivariant
//! blocks this makes frame order irrelevant to what the encoder can express,
//! which is deliberate for diarization.

use crate::encoder::params::AttentionParams;
use crate::error::{Error, Result};
use crate::numerics::{matmul, Matrix};

pub(crate) struct AttnCache {
    pub x: Matrix,
    pub q: Matrix,
    pub k: Matrix,
    pub v: Matrix,
    /// Row-stochastic attention weights, one T x T matrix per head.
    pub attn: Vec<Matrix>,
    pub concat: Matrix,
}

fn softmax_rows_in_place(scores: &mut Matrix) {
    for t in 0..scores.rows() {
        let row = scores.row_mut(t);
        let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

pub(crate) fn mhsa_forward(
    params: &AttentionParams,
    x: &Matrix,
    n_heads: usize,
) -> Result<(Matrix, AttnCache)> {
    let d = x.cols();
    if n_heads == 0 || d % n_heads != 0 {
        return Err(Error::config(format!(
            "attention: {d} dims not divisible into {n_heads} heads"
        )));
    }
    let dk = d / n_heads;
    let scale = 1.0 / (dk as f64).sqrt();
    let q = matmul(x, &params.wq.w)?.add_row_broadcast(&params.wq.b)?;
    let k = matmul(x, &params.wk.w)?.add_row_broadcast(&params.wk.b)?;
    let v = matmul(x, &params.wv.w)?.add_row_broadcast(&params.wv.b)?;
    let mut concat = Matrix::zeros(x.rows(), d);
    let mut attn = Vec::with_capacity(n_heads);
    for h in 0..n_heads {
        let qh = q.col_slice(h * dk, dk);
        let kh = k.col_slice(h * dk, dk);
        let vh = v.col_slice(h * dk, dk);
        let mut scores = matmul(&qh, &kh.transpose())?.scale(scale);
        softmax_rows_in_place(&mut scores);
        let oh = matmul(&scores, &vh)?;
        concat.set_col_slice(h * dk, &oh);
        attn.push(scores);
    }
    let y = matmul(&concat, &params.wo.w)?.add_row_broadcast(&params.wo.b)?;
    Ok((
        y,
        AttnCache {
            x: x.clone(),
            q,
            k,
            v,
            attn,
            concat,
        },
    ))
}

/// Accumulates projection gradients into `grad` and returns dx.
pub(crate) fn mhsa_backward(
    params: &AttentionParams,
    cache: &AttnCache,
    dy: &Matrix,
    n_heads: usize,
    grad: &mut AttentionParams,
) -> Result<Matrix> {
    let (t_len, d) = (cache.x.rows(), cache.x.cols());
    let dk = d / n_heads;
    let scale = 1.0 / (dk as f64).sqrt();

    let dconcat = params.wo.backward_from(&cache.concat, dy, &mut grad.wo)?;

    let mut dq = Matrix::zeros(t_len, d);
    let mut dkm = Matrix::zeros(t_len, d);
    let mut dv = Matrix::zeros(t_len, d);
    for h in 0..n_heads {
        let ah = &cache.attn[h];
        let qh = cache.q.col_slice(h * dk, dk);
        let kh = cache.k.col_slice(h * dk, dk);
        let vh = cache.v.col_slice(h * dk, dk);
        let doh = dconcat.col_slice(h * dk, dk);

        let dah = matmul(&doh, &vh.transpose())?;
        let dvh = matmul(&ah.transpose(), &doh)?;

        // softmax backward per row: ds = a * (da - sum(da * a))
        let mut dsh = Matrix::zeros(t_len, t_len);
        for t in 0..t_len {
            let mut dot = 0.0;
            for j in 0..t_len {
                dot += dah.get(t, j) * ah.get(t, j);
            }
            for j in 0..t_len {
                dsh.set(t, j, ah.get(t, j) * (dah.get(t, j) - dot));
            }
        }

        let dqh = matmul(&dsh, &kh)?.scale(scale);
        let dkh = matmul(&dsh.transpose(), &qh)?.scale(scale);
        dq.set_col_slice(h * dk, &dqh);
        dkm.set_col_slice(h * dk, &dkh);
        dv.set_col_slice(h * dk, &dvh);
    }

    let dx_q = params.wq.backward_from(&cache.x, &dq, &mut grad.wq)?;
    let dx_k = params.wk.backward_from(&cache.x, &dkm, &mut grad.wk)?;
    let dx_v = params.wv.backward_from(&cache.x, &dv, &mut grad.wv)?;
    Ok(dx_q.add(&dx_k)?.add(&dx_v)?)
}
