//! Row-major `f64` matrix and the elementwise/normalization kernels built on
//! it. All accumulations run left-to-right in row-major order so results are
//! reproducible bit for bit.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::config(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::config("ragged rows in matrix literal".to_string()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Fill each entry from a generator, row-major order.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.map(|x| x * s)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::config(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Add a row vector to every row.
    pub fn add_row_broadcast(&self, row: &[f64]) -> Result<Matrix> {
        if row.len() != self.cols {
            return Err(Error::config(format!(
                "broadcast row length {} vs {} columns",
                row.len(),
                self.cols
            )));
        }
        let mut out = self.clone();
        for r in 0..out.rows {
            for (x, b) in out.row_mut(r).iter_mut().zip(row) {
                *x += b;
            }
        }
        Ok(out)
    }

    /// Column sums as a vector of length `cols`. Rows accumulate in order.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (acc, &x) in out.iter_mut().zip(self.row(r)) {
                *acc += x;
            }
        }
        out
    }

    /// Copy of columns [start, start+width).
    pub fn col_slice(&self, start: usize, width: usize) -> Matrix {
        debug_assert!(start + width <= self.cols);
        let mut out = Matrix::zeros(self.rows, width);
        for r in 0..self.rows {
            out.row_mut(r)
                .copy_from_slice(&self.row(r)[start..start + width]);
        }
        out
    }

    /// Write `block` into columns [start, start+block.cols).
    pub fn set_col_slice(&mut self, start: usize, block: &Matrix) {
        debug_assert_eq!(self.rows, block.rows);
        debug_assert!(start + block.cols <= self.cols);
        for r in 0..self.rows {
            self.row_mut(r)[start..start + block.cols].copy_from_slice(block.row(r));
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }
}

/// Standard matrix product. For each output cell the inner products
/// accumulate over k = 0..a.cols left to right, so the result is
/// deterministic for fixed inputs.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::config(format!(
            "matmul dimension mismatch: {}x{} * {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    // i-k-j loop order: each out[i][j] still receives its k terms in
    // increasing k, identical to the naive i-j-k order.
    for i in 0..a.rows {
        let a_row = a.row(i);
        for k in 0..a.cols {
            let aik = a_row[k];
            let b_row = b.row(k);
            let out_row = out.row_mut(i);
            for j in 0..b.cols {
                out_row[j] += aik * b_row[j];
            }
        }
    }
    Ok(out)
}

impl Matrix {
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        matmul(self, other)
    }
}

/// Row-wise layer normalization with a biased variance estimator:
/// each row is mapped to zero mean and unit variance, then scaled by `gain`
/// and shifted by `bias`.
pub fn layer_norm(x: &Matrix, gain: &[f64], bias: &[f64], eps: f64) -> Result<Matrix> {
    if x.cols() == 0 {
        return Err(Error::config("layer_norm on zero-length rows".to_string()));
    }
    if gain.len() != x.cols() || bias.len() != x.cols() {
        return Err(Error::config(format!(
            "layer_norm gain/bias length {}/{} vs {} columns",
            gain.len(),
            bias.len(),
            x.cols()
        )));
    }
    if eps <= 0.0 {
        return Err(Error::config(format!("layer_norm eps {eps} must be > 0")));
    }
    let n = x.cols() as f64;
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for r in 0..x.rows() {
        let row = x.row(r);
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let inv_std = 1.0 / (var + eps).sqrt();
        for (c, &v) in row.iter().enumerate() {
            out.set(r, c, (v - mean) * inv_std * gain[c] + bias[c]);
        }
    }
    Ok(out)
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn swish(x: f64) -> f64 {
    x * sigmoid(x)
}

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Gated linear unit: the input splits column-wise into halves `a || b` and
/// the output is `a * sigmoid(b)`.
pub fn glu(x: &Matrix) -> Result<Matrix> {
    if x.cols() % 2 != 0 {
        return Err(Error::config(format!(
            "glu needs an even column count, got {}",
            x.cols()
        )));
    }
    let half = x.cols() / 2;
    let mut out = Matrix::zeros(x.rows(), half);
    for r in 0..x.rows() {
        let row = x.row(r);
        for c in 0..half {
            out.set(r, c, row[c] * sigmoid(row[half + c]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.uniform_f64(-1.0, 1.0))
    }

    #[test]
    fn matmul_identity() {
        let mut rng = Rng::new(1);
        let m = random_matrix(&mut rng, 3, 4);
        let got = matmul(&Matrix::identity(3), &m).unwrap();
        assert_eq!(got, m);
    }

    #[test]
    fn matmul_hand_example() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let got = matmul(&a, &b).unwrap();
        assert_eq!(got.data(), &[3.0, 7.0]);
    }

    #[test]
    fn matmul_dimension_mismatch_is_config_error() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        assert!(matches!(matmul(&a, &b), Err(Error::Config(_))));
    }

    // Naive triple-loop oracle, j before k, independent of the kernel's
    // loop order.
    fn matmul_oracle(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for k in 0..a.cols() {
                    acc += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    #[test]
    fn matmul_matches_naive_oracle() {
        let mut rng = Rng::new(7);
        let a = random_matrix(&mut rng, 7, 5);
        let b = random_matrix(&mut rng, 5, 3);
        let got = matmul(&a, &b).unwrap();
        let want = matmul_oracle(&a, &b);
        for (g, w) in got.data().iter().zip(want.data()) {
            assert!((g - w).abs() <= 1e-12);
        }
    }

    #[test]
    fn matmul_associative_within_tolerance() {
        let mut rng = Rng::new(11);
        for _ in 0..5 {
            let a = random_matrix(&mut rng, 4, 6);
            let b = random_matrix(&mut rng, 6, 5);
            let c = random_matrix(&mut rng, 5, 3);
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            for (l, r) in left.data().iter().zip(right.data()) {
                assert!((l - r).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn layer_norm_constant_row_is_zero() {
        let x = Matrix::from_rows(&[vec![5.0, 5.0, 5.0, 5.0]]).unwrap();
        let out = layer_norm(&x, &[1.0; 4], &[0.0; 4], 1e-5).unwrap();
        for &v in out.data() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn layer_norm_basic_row() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let out = layer_norm(&x, &[1.0; 3], &[0.0; 3], 1e-12).unwrap();
        let mean: f64 = out.row(0).iter().sum::<f64>() / 3.0;
        let var: f64 = out.row(0).iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / 3.0;
        assert!(mean.abs() <= 1e-9);
        assert!((var - 1.0).abs() <= 1e-9);
    }

    // Independent two-pass mean/variance oracle.
    #[test]
    fn layer_norm_matches_two_pass_oracle() {
        let mut rng = Rng::new(23);
        let x = random_matrix(&mut rng, 4, 9);
        let gain: Vec<f64> = (0..9).map(|_| rng.uniform_f64(0.5, 1.5)).collect();
        let bias: Vec<f64> = (0..9).map(|_| rng.uniform_f64(-0.5, 0.5)).collect();
        let eps = 1e-5;
        let got = layer_norm(&x, &gain, &bias, eps).unwrap();
        for r in 0..x.rows() {
            let row = x.row(r);
            let mut mean = 0.0;
            for &v in row {
                mean += v;
            }
            mean /= 9.0;
            let mut var = 0.0;
            for &v in row {
                var += (v - mean).powi(2);
            }
            var /= 9.0;
            for c in 0..9 {
                let want = (row[c] - mean) / (var + eps).sqrt() * gain[c] + bias[c];
                assert!((got.get(r, c) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn layer_norm_row_stats_property() {
        let mut rng = Rng::new(31);
        let x = random_matrix(&mut rng, 6, 16);
        let out = layer_norm(&x, &[1.0; 16], &[0.0; 16], 1e-12).unwrap();
        for r in 0..out.rows() {
            let row = out.row(r);
            let mean = row.iter().sum::<f64>() / 16.0;
            let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / 16.0;
            assert!(mean.abs() <= 1e-9);
            assert!((var - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn sigmoid_at_zero() {
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn glu_with_zero_gate_halves_input() {
        let x = Matrix::from_rows(&[vec![2.0, -4.0, 0.0, 0.0]]).unwrap();
        let out = glu(&x).unwrap();
        assert_eq!(out.data(), &[1.0, -2.0]);
    }

    #[test]
    fn glu_odd_cols_is_config_error() {
        let x = Matrix::zeros(1, 3);
        assert!(matches!(glu(&x), Err(Error::Config(_))));
    }

    #[test]
    fn swish_matches_scalar_oracle() {
        let mut rng = Rng::new(41);
        let x = random_matrix(&mut rng, 5, 7);
        let got = x.map(swish);
        for (g, &v) in got.data().iter().zip(x.data()) {
            let want = v / (1.0 + (-v).exp()) * 1.0; // x * sigma(x), rewritten
            assert!((g - want).abs() <= 1e-12);
        }
    }
}
