use crate::annotation::Annotation;
use crate::encoder::POSTERIOR_SHIFT;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Rasterizes an annotation onto the subsampled frame grid as a binary
/// `n_frames x n_speakers` matrix. Frame `t` covers `[t*0.1, (t+1)*0.1)`
/// seconds; a speaker is marked active when their speech covers at least
/// half of the frame. Speakers map to columns in sorted-name order so the
/// layout does not depend on segment order; unused trailing columns stay
/// zero.
pub fn rasterize_labels(ann: &Annotation, n_frames: usize, n_speakers: usize) -> Result<Matrix> {
    ann.validate()?;
    let mut names = ann.speakers();
    names.sort_unstable();
    if names.len() > n_speakers {
        return Err(Error::input(format!(
            "labels: annotation {} has {} speakers but the model tracks {}",
            ann.recording_id,
            names.len(),
            n_speakers
        )));
    }
    let mut y = Matrix::zeros(n_frames, n_speakers);
    let half_frame = POSTERIOR_SHIFT / 2.0;
    for (col, name) in names.iter().enumerate() {
        // Merge the speaker's segments so self-overlap cannot double-count.
        let mut spans: Vec<(f64, f64)> = ann
            .segments
            .iter()
            .filter(|s| s.speaker == *name)
            .map(|s| (s.start, s.end))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
        for (start, end) in spans {
            match merged.last_mut() {
                Some(last) if start <= last.1 => last.1 = last.1.max(end),
                _ => merged.push((start, end)),
            }
        }
        for t in 0..n_frames {
            let fs = t as f64 * POSTERIOR_SHIFT;
            let fe = fs + POSTERIOR_SHIFT;
            let covered: f64 = merged
                .iter()
                .map(|&(start, end)| (end.min(fe) - start.max(fs)).max(0.0))
                .sum();
            if covered + 1e-9 >= half_frame {
                y.set(t, col, 1.0);
            }
        }
    }
    Ok(y)
}
