//! Assignment problems: minimum-cost perfect matching on a square cost
//! matrix (shortest augmenting paths with potentials, O(n^3)), plus the
//! maximum-agreement wrapper the DER scorer uses for speaker mapping.

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Row-to-column assignment minimizing total cost over a square matrix.
pub fn min_cost_assignment(cost: &Matrix) -> Result<Vec<usize>> {
    if cost.rows() != cost.cols() {
        return Err(Error::config(format!(
            "min_cost_assignment: {}x{} matrix is not square",
            cost.rows(),
            cost.cols()
        )));
    }
    let n = cost.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1-based arrays; row/col 0 is a virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // matched_row[j] = row held by col j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        // Walk the augmenting path back to the source.
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=n {
        row_to_col[matched_row[j] - 1] = j - 1;
    }
    Ok(row_to_col)
}

/// Maps each row (reference speaker) of a rectangular non-negative weight
/// matrix to at most one column (hypothesis speaker), maximizing total
/// weight. Rows matched to padding columns come back as None.
pub fn max_agreement_assignment(weight: &Matrix) -> Result<Vec<Option<usize>>> {
    let (r, c) = (weight.rows(), weight.cols());
    if r == 0 || c == 0 {
        return Ok(vec![None; r]);
    }
    let n = r.max(c);
    let max_w = weight.data().iter().cloned().fold(0.0f64, f64::max);
    // Pad to square; padding cells cost max_w (weight 0).
    let cost = Matrix::from_fn(n, n, |i, j| {
        if i < r && j < c {
            max_w - weight.get(i, j)
        } else {
            max_w
        }
    });
    let assignment = min_cost_assignment(&cost)?;
    Ok((0..r)
        .map(|i| {
            let j = assignment[i];
            if j < c {
                Some(j)
            } else {
                None
            }
        })
        .collect())
}
