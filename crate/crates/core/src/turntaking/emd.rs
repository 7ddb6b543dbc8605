//! Earth mover's distance between two empirical 1-D distributions.
//!
//! Both samples carry equal total probability mass; with L1 ground
//! distance the minimal transport cost equals the integral of the absolute
//! difference of the two empirical CDFs, which a single merge-walk over
//! the sorted values computes exactly.

use crate::error::{Error, Result};
use crate::turntaking::DurationSample;

pub fn emd_1d(a: &DurationSample, b: &DurationSample) -> Result<f64> {
    if a.durations.is_empty() || b.durations.is_empty() {
        return Err(Error::input("emd_1d: empty duration sample"));
    }
    let mut xs = a.durations.clone();
    let mut ys = b.durations.clone();
    for v in xs.iter().chain(ys.iter()) {
        if !v.is_finite() {
            return Err(Error::input("emd_1d: non-finite duration"));
        }
    }
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());

    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = xs[0].min(ys[0]);
    let mut total = 0.0;
    while i < xs.len() || j < ys.len() {
        let next = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        total += (next - prev) * (i as f64 / n - j as f64 / m).abs();
        while i < xs.len() && xs[i] == next {
            i += 1;
        }
        while j < ys.len() && ys[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}
