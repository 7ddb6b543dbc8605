//! Legacy context expansion: concatenate each frame with its seven
//! predecessors and seven successors (replicate padding at the edges),
//! then keep every tenth frame starting at frame 0.

use crate::features::FeatureMatrix;
use crate::numerics::Matrix;

const CONTEXT: usize = 7;
const DECIMATE: usize = 10;

/// T x F at 10 ms in, ceil(T/10) x 15F at 100 ms out.
pub fn stack_and_decimate(f: &FeatureMatrix) -> FeatureMatrix {
    let (t_len, dims) = (f.frames(), f.dims());
    let out_len = t_len.div_ceil(DECIMATE);
    let mut out = Matrix::zeros(out_len, (2 * CONTEXT + 1) * dims);
    for ot in 0..out_len {
        let center = ot * DECIMATE;
        for (slot, offset) in (-(CONTEXT as isize)..=CONTEXT as isize).enumerate() {
            let src = (center as isize + offset).clamp(0, t_len as isize - 1) as usize;
            for d in 0..dims {
                out.set(ot, slot * dims + d, f.data.get(src, d));
            }
        }
    }
    FeatureMatrix {
        data: out,
        frame_shift: f.frame_shift * DECIMATE as f64,
    }
}
