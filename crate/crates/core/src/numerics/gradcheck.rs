//! Central finite-difference gradient estimation for verifying analytic
//! backward passes.

use crate::error::{Error, Result};

/// Numerical gradient of a scalar function at `theta` via central
/// differences: g[i] = (f(theta + h e_i) - f(theta - h e_i)) / (2h).
///
/// `h = 1e-5` balances truncation against round-off for f64 scalar losses
/// of moderate magnitude.
pub fn finite_difference_gradient<F>(mut f: F, theta: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut probe = theta.to_vec();
    let mut grad = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        probe[i] = theta[i] + h;
        let up = f(&probe)?;
        probe[i] = theta[i] - h;
        let down = f(&probe)?;
        probe[i] = theta[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::eval(format!(
                "finite_difference_gradient: non-finite probe at coordinate {i}"
            )));
        }
        grad[i] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}
