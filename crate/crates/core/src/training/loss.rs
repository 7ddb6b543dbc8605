use itertools::Itertools;

use crate::encoder::PosteriorMatrix;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Probabilities are clamped to `[PROB_CLIP, 1 - PROB_CLIP]` before any log,
/// bounding every per-cell loss term by -ln(PROB_CLIP).
pub const PROB_CLIP: f64 = 1e-7;

fn clip(p: f64) -> f64 {
    p.clamp(PROB_CLIP, 1.0 - PROB_CLIP)
}

fn check_shapes(z: &PosteriorMatrix, y: &Matrix) -> Result<()> {
    let (t, s) = (z.data.rows(), z.data.cols());
    if (t, s) != (y.rows(), y.cols()) {
        return Err(Error::input(format!(
            "pit_bce: posterior is {t}x{s} but labels are {}x{}",
            y.rows(),
            y.cols()
        )));
    }
    if t == 0 || s == 0 {
        return Err(Error::input("pit_bce: empty posterior"));
    }
    if y.data().iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::input("pit_bce: labels must be 0/1"));
    }
    Ok(())
}

/// Permutation-free binary cross entropy: tries every assignment of label
/// columns to posterior columns and keeps the cheapest, so the loss never
/// punishes an arbitrary speaker ordering. Returns the mean BCE over all
/// `frames x speakers` cells and the winning permutation `phi` (posterior
/// column `s` was scored against label column `phi[s]`). Ties go to the
/// lexicographically smallest permutation.
pub fn pit_bce_loss(z: &PosteriorMatrix, y: &Matrix) -> Result<(f64, Vec<usize>)> {
    check_shapes(z, y)?;
    let (t, s) = (z.data.rows(), z.data.cols());
    let mut best_loss = f64::INFINITY;
    let mut best_perm = Vec::new();
    // `permutations` emits in lexicographic order, so `<` keeps the smallest
    // permutation on ties.
    for perm in (0..s).permutations(s) {
        let mut total = 0.0;
        for row in 0..t {
            for col in 0..s {
                let p = clip(z.data.get(row, col));
                let label = y.get(row, perm[col]);
                total -= label * p.ln() + (1.0 - label) * (1.0 - p).ln();
            }
        }
        let loss = total / (t * s) as f64;
        if loss < best_loss {
            best_loss = loss;
            best_perm = perm;
        }
    }
    Ok((best_loss, best_perm))
}

/// Gradient of `pit_bce_loss` with respect to the posterior, holding the
/// winning permutation fixed: `(p - y) / (p (1 - p)) / (T S)` with the same
/// clipping as the loss, so saturated cells get a bounded push instead of an
/// unbounded one.
pub fn pit_bce_grad(z: &PosteriorMatrix, y: &Matrix, perm: &[usize]) -> Result<Matrix> {
    check_shapes(z, y)?;
    let (t, s) = (z.data.rows(), z.data.cols());
    if perm.len() != s {
        return Err(Error::input("pit_bce: permutation length mismatch"));
    }
    let mut seen = vec![false; s];
    for &p in perm {
        if p >= s || seen[p] {
            return Err(Error::input("pit_bce: not a permutation of the label columns"));
        }
        seen[p] = true;
    }
    let norm = 1.0 / (t * s) as f64;
    let mut dz = Matrix::zeros(t, s);
    for row in 0..t {
        for col in 0..s {
            let p = clip(z.data.get(row, col));
            let label = y.get(row, perm[col]);
            dz.set(row, col, (p - label) / (p * (1.0 - p)) * norm);
        }
    }
    Ok(dz)
}
