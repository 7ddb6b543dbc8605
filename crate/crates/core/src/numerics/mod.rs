//! Deterministic dense linear algebra, activations, convolution primitives,
//! a seeded PRNG, and a finite-difference gradient checker.
//!
//! Everything is `f64` and single-threaded per call: identical inputs give
//! bitwise-identical outputs on one platform. Summation orders are fixed and
//! documented where they matter.

mod conv;
mod gradcheck;
mod matrix;
mod rng;

pub use conv::{conv1d_depthwise, conv2d_depthwise_separable, same_pad_before, Grid3};
pub(crate) use conv::{depthwise_conv2d, pointwise_mix};
pub use gradcheck::finite_difference_gradient;
pub use matrix::{glu, layer_norm, matmul, relu, sigmoid, swish, Matrix};
pub use rng::Rng;
