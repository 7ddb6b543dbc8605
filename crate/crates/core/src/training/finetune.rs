use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::annotation::Annotation;
use crate::encoder::{decide, Model};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scoring::{score_corpus, DERReport, DEFAULT_COLLAR};
use crate::training::config::{OptimizerKind, TrainConfig};
use crate::training::trainer::{train, TrainSequence};

/// One adaptation recipe from the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl GridPoint {
    fn label(&self) -> &'static str {
        match self.optimizer {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        }
    }

    fn train_config(&self, epochs: usize, batch_size: usize, seed: u64) -> TrainConfig {
        let base = match self.optimizer {
            OptimizerKind::Adam => TrainConfig::adam_fixed(self.lr),
            OptimizerKind::Sgd => TrainConfig::sgd_fixed(self.lr, self.momentum, self.weight_decay),
        };
        TrainConfig { epochs, batch_size, seed, ..base }
    }
}

/// The adaptation sweep: constant-rate Adam at 1e-5 plus SGD over learning
/// rate {0.01, 0.005, 0.001} x momentum {0.9, 0.0} x weight decay
/// {0.0, 0.0001} -- 13 configurations.
pub fn finetune_grid() -> Vec<GridPoint> {
    let mut grid = vec![GridPoint {
        optimizer: OptimizerKind::Adam,
        lr: 1e-5,
        momentum: 0.0,
        weight_decay: 0.0,
    }];
    for lr in [0.01, 0.005, 0.001] {
        for momentum in [0.9, 0.0] {
            for weight_decay in [0.0, 0.0001] {
                grid.push(GridPoint { optimizer: OptimizerKind::Sgd, lr, momentum, weight_decay });
            }
        }
    }
    grid
}

/// A recording used for DER evaluation: features plus its reference
/// annotation.
#[derive(Debug, Clone)]
pub struct EvalSequence {
    pub id: String,
    pub features: Matrix,
    pub reference: Annotation,
}

/// How posteriors become scored hypotheses during evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub threshold: f64,
    pub median_window: usize,
    pub collar: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { threshold: 0.5, median_window: 11, collar: DEFAULT_COLLAR }
    }
}

/// Runs inference on every evaluation recording and pools DER components
/// across the set.
pub fn evaluate_corpus_der(
    model: &Model,
    dev: &[EvalSequence],
    eval: &EvalConfig,
) -> Result<DERReport> {
    if dev.is_empty() {
        return Err(Error::input("evaluate: empty evaluation set"));
    }
    let mut references = BTreeMap::new();
    let mut hypotheses = BTreeMap::new();
    for item in dev {
        let (z, _) = model.forward(&item.features)?;
        let hyp = decide(&z, &item.id, eval.threshold, eval.median_window)?;
        references.insert(item.id.clone(), item.reference.clone());
        hypotheses.insert(item.id.clone(), hyp);
    }
    let (_, pooled) = score_corpus(&references, &hypotheses, eval.collar, false)?;
    Ok(pooled)
}

#[derive(Debug, Clone)]
pub struct FinetuneOutcome {
    pub point: GridPoint,
    pub report: DERReport,
}

/// Fine-tunes the base model once per grid point on the adaptation corpus,
/// scores each result on the evaluation set, and returns the outcomes sorted
/// by DER (ascending, stable in grid order on ties).
pub fn finetune(
    base: &Model,
    adapt: &[TrainSequence],
    dev: &[EvalSequence],
    epochs: usize,
    batch_size: usize,
    seed: u64,
    eval: &EvalConfig,
) -> Result<Vec<FinetuneOutcome>> {
    if adapt.is_empty() {
        return Err(Error::input("finetune: empty adaptation corpus"));
    }
    let mut outcomes = Vec::new();
    for point in finetune_grid() {
        let mut model = base.clone();
        if epochs > 0 {
            let cfg = point.train_config(epochs, batch_size, seed);
            train(&mut model, adapt, &cfg, None)?;
        }
        let report = evaluate_corpus_der(&model, dev, eval)?;
        outcomes.push(FinetuneOutcome { point, report });
    }
    outcomes.sort_by(|a, b| a.report.der.total_cmp(&b.report.der));
    Ok(outcomes)
}

/// Tab-separated sweep report, one row per configuration, best DER first.
pub fn finetune_report_tsv(outcomes: &[FinetuneOutcome]) -> String {
    let mut out = String::from("optimizer\tlr\tmomentum\tweight_decay\tder\n");
    for o in outcomes {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.3}",
            o.point.label(),
            o.point.lr,
            o.point.momentum,
            o.point.weight_decay,
            o.report.der
        )
        .unwrap();
    }
    out
}
