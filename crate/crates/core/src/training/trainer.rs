use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::encoder::{write_checkpoint, EncoderParams, Model};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};
use crate::training::config::TrainConfig;
use crate::training::loss::{pit_bce_grad, pit_bce_loss};
use crate::training::schedule::effective_lr;

/// One training example: raw 10 ms features and the matching 100 ms label
/// grid (`ceil(frames/10)` rows).
#[derive(Debug, Clone)]
pub struct TrainSequence {
    pub id: String,
    pub features: Matrix,
    pub labels: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossLine {
    pub step: usize,
    pub lr: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossLog {
    pub lines: Vec<LossLine>,
}

impl LossLog {
    /// One `step\tlr\tloss` row per optimizer step.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            writeln!(out, "{}\t{}\t{}", l.step, l.lr, l.loss).unwrap();
        }
        out
    }
}

fn check_sequence(seq: &TrainSequence, model: &Model) -> Result<()> {
    let cfg = &model.config;
    if seq.features.rows() == 0 {
        return Err(Error::input(format!("train: sequence {} has no frames", seq.id)));
    }
    if seq.features.cols() != cfg.input_dims {
        return Err(Error::input(format!(
            "train: sequence {} has {}-dim features, model expects {}",
            seq.id,
            seq.features.cols(),
            cfg.input_dims
        )));
    }
    let want_rows = seq.features.rows().div_ceil(10);
    if seq.labels.rows() != want_rows || seq.labels.cols() != cfg.n_speakers {
        return Err(Error::input(format!(
            "train: sequence {} labels are {}x{}, expected {}x{}",
            seq.id,
            seq.labels.rows(),
            seq.labels.cols(),
            want_rows,
            cfg.n_speakers
        )));
    }
    Ok(())
}

/// Forward/backward for one sequence: mean PIT-BCE loss and the parameter
/// gradients under the winning label permutation.
fn sequence_grads(model: &Model, seq: &TrainSequence) -> Result<(f64, EncoderParams)> {
    let (z, cache) = model.forward(&seq.features)?;
    let (loss, perm) = pit_bce_loss(&z, &seq.labels)?;
    let dz = pit_bce_grad(&z, &seq.labels, &perm)?;
    let grads = model.backward(&cache, &dz)?;
    Ok((loss, grads))
}

/// Mean PIT-BCE loss of the current model over a corpus, without touching
/// parameters. Used for before/after probes.
pub fn mean_corpus_loss(model: &Model, corpus: &[TrainSequence]) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::input("train: empty corpus"));
    }
    let mut total = 0.0;
    for seq in corpus {
        check_sequence(seq, model)?;
        let (z, _) = model.forward(&seq.features)?;
        total += pit_bce_loss(&z, &seq.labels)?.0;
    }
    Ok(total / corpus.len() as f64)
}

/// Runs the full epoch/batch loop in place. Each epoch reshuffles the corpus
/// with a child seed of (config seed, epoch), batches are mini-batched in
/// shuffled order, per-sequence gradients within a batch are computed
/// independently (possibly in parallel) and reduced in batch order, and the
/// batch mean drives one optimizer step. Writes `epochN.ckpt` after each
/// epoch when `out_dir` is given and returns the per-step loss log.
pub fn train(
    model: &mut Model,
    corpus: &[TrainSequence],
    cfg: &TrainConfig,
    out_dir: Option<&Path>,
) -> Result<LossLog> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::input("train: empty corpus"));
    }
    for seq in corpus {
        check_sequence(seq, model)?;
    }
    let mut opt = super::optim::Optimizer::new(cfg, &model.params);
    let mut log = LossLog::default();
    let mut step = 0;
    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        Rng::new(Rng::child_seed(cfg.seed, epoch as u64)).shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            step += 1;
            let per_seq: Vec<(f64, EncoderParams)> = batch
                .par_iter()
                .map(|&i| sequence_grads(model, &corpus[i]))
                .collect::<Result<Vec<_>>>()?;
            let mut grads = model.params.zeros_like();
            let mut loss_sum = 0.0;
            for (loss, g) in &per_seq {
                loss_sum += loss;
                grads.add_assign(g)?;
            }
            let inv = 1.0 / batch.len() as f64;
            grads.scale(inv);
            let lr = effective_lr(cfg, model.config.d_model, step)?;
            opt.step(&mut model.params, &grads, lr)?;
            log.lines.push(LossLine { step, lr, loss: loss_sum * inv });
        }
        if let Some(dir) = out_dir {
            write_checkpoint(dir.join(format!("epoch{epoch}.ckpt")), model)?;
        }
    }
    Ok(log)
}
