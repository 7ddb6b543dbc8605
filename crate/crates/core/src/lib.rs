//! Desk-scale end-to-end neural diarization (EEND) laboratory.
//!
//! The crate covers the whole two-speaker diarization loop in plain `f64`
//! Rust, small enough that every numeric path can be checked against a
//! brute-force oracle or central finite differences:
//!
//! * [`numerics`] — dense matrices, activations, convolution primitives, a
//!   SplitMix64 PRNG and a finite-difference gradient checker.
//! * [`features`] — WAV input, log-Mel filterbanks, SpecAugment, frame
//!   stacking with decimation, and a binary feature archive.
//! * [`encoder`] — Transformer and Conformer encoder stacks with a
//!   convolutional-subsampling front-end, analytic reverse-mode gradients
//!   for every parameter, and checkpoint serialization.
//! * [`training`] — permutation-invariant BCE loss, Noam schedule, Adam/SGD,
//!   checkpoint averaging, the training loop and the fine-tuning grid.
//! * [`sim`] — two-speaker conversation mixture simulation with noise/RIR
//!   augmentation and corpus turn-taking statistics.
//! * [`turntaking`] — overlap/silence duration extraction and the
//!   EMD-based conversational similarity.
//! * [`scoring`] — RTTM I/O and DER with a 250 ms collar and optimal
//!   speaker mapping.

pub mod annotation;
pub mod encoder;
pub mod error;
pub mod features;
pub mod numerics;
pub mod scoring;
pub mod simulator;
pub mod training;
pub mod turntaking;

pub use annotation::{Annotation, Segment};
pub use error::{Error, Result};
