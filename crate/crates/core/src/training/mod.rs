//! Training loop for the diarization encoder: permutation-invariant BCE,
//! Adam/SGD with a warmup schedule, deterministic shuffled epochs,
//! checkpoint averaging, and the constant-rate adaptation sweep.

mod average;
mod config;
mod finetune;
mod labels;
mod loss;
mod optim;
mod schedule;
mod trainer;

pub use average::{average_checkpoints, average_models, last_epoch_paths};
pub use config::{OptimizerKind, Schedule, TrainConfig};
pub use finetune::{
    evaluate_corpus_der, finetune, finetune_grid, finetune_report_tsv, EvalConfig, EvalSequence,
    FinetuneOutcome, GridPoint,
};
pub use labels::rasterize_labels;
pub use loss::{pit_bce_grad, pit_bce_loss, PROB_CLIP};
pub use optim::Optimizer;
pub use schedule::{effective_lr, noam_lr};
pub use trainer::{mean_corpus_loss, train, LossLine, LossLog, TrainSequence};
