//! Finite-difference audit of the analytic gradients: sweeps every
//! parameter of the four toy model variants and reports the worst relative
//! disagreement per variant.

use eend_core::encoder::{Arch, EncoderConfig, EncoderParams, Frontend, Model};
use eend_core::error::Result;
use eend_core::numerics::{Matrix, Rng};
use eend_core::training::{pit_bce_grad, pit_bce_loss};

pub struct GradcheckRow {
    pub arch: Arch,
    pub frontend: Frontend,
    pub max_rel_err: f64,
}

pub fn arch_name(arch: Arch) -> &'static str {
    match arch {
        Arch::Transformer => "transformer",
        Arch::Conformer => "conformer",
    }
}

pub fn frontend_name(frontend: Frontend) -> &'static str {
    match frontend {
        Frontend::Stacked => "stacked",
        Frontend::ConvSubsample => "conv_subsample",
    }
}

fn flatten(params: &EncoderParams) -> Vec<f64> {
    params.tensors().iter().flat_map(|(_, t)| t.iter().copied()).collect()
}

fn set_flat(params: &mut EncoderParams, flat: usize, v: f64) {
    let mut off = 0;
    for (_, t) in params.tensors_mut() {
        if flat < off + t.len() {
            t[flat - off] = v;
            return;
        }
        off += t.len();
    }
    unreachable!("flat index {flat} beyond parameter bundle");
}

/// Relative error with a 1e-4 floor on the denominator, so near-zero
/// coordinate pairs are judged on an absolute scale.
fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-4)
}

pub fn run(seed: u64) -> Result<Vec<GradcheckRow>> {
    let combos = [
        (Arch::Transformer, Frontend::Stacked),
        (Arch::Transformer, Frontend::ConvSubsample),
        (Arch::Conformer, Frontend::Stacked),
        (Arch::Conformer, Frontend::ConvSubsample),
    ];
    let h = 1e-6;
    let mut rows = Vec::new();
    for (arch, frontend) in combos {
        let cfg = EncoderConfig::toy(arch, frontend);
        let mut rng = Rng::new(seed);
        let mut model = Model::init(cfg, &mut rng)?;
        let feats = Matrix::from_fn(120, 23, |_, _| rng.uniform_f64(-1.0, 1.0));
        let labels = Matrix::from_fn(12, 2, |_, _| rng.uniform_usize(2) as f64);

        let (post, cache) = model.forward(&feats)?;
        let (_, perm) = pit_bce_loss(&post, &labels)?;
        let dz = pit_bce_grad(&post, &labels, &perm)?;
        let analytic = flatten(&model.backward(&cache, &dz)?);

        let theta = flatten(&model.params);
        let mut worst = 0.0f64;
        for k in 0..theta.len() {
            set_flat(&mut model.params, k, theta[k] + h);
            let up = pit_bce_loss(&model.forward(&feats)?.0, &labels)?.0;
            set_flat(&mut model.params, k, theta[k] - h);
            let down = pit_bce_loss(&model.forward(&feats)?.0, &labels)?.0;
            set_flat(&mut model.params, k, theta[k]);
            worst = worst.max(rel_err(analytic[k], (up - down) / (2.0 * h)));
        }
        rows.push(GradcheckRow { arch, frontend, max_rel_err: worst });
    }
    Ok(rows)
}
