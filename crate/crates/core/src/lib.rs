//! Numerical core for studying loss and error interpolation curves between an
//! initialization and a trained model.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure computation:
//!
//! - [`synthdata`]: balanced orthogonal-feature datasets and half-normal weight init.
//! - [`homonet`]: the r-homogeneous-weight model `f_i(x) = <W_i, x>^r + b_i`.
//! - [`mlpnet`]: depth-r fully-connected nets with identity or ReLU activation.
//! - [`trainer`]: explicit-Euler gradient flow, stage detection, bias-rate bookkeeping.
//! - [`interpolate`]: linear and homogeneous-bias parameter paths and their curves.
//! - [`bounds`]: closed-form plateau/monotonicity boundaries and curve checks.
//! - [`counterexamples`]: a hard objective with a convex interpolation and an easy
//!   objective with a non-monotonic one.
//!
//! File formats, configuration and the command-line driver live in the
//! `plateau-lab` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

extern crate alloc;

pub mod bounds;
pub mod counterexamples;
mod error;
pub mod eval;
pub mod homonet;
pub mod interpolate;
pub mod linalg;
pub mod mlpnet;
pub mod rng;
pub mod synthdata;
pub mod trainer;

pub use error::{Error, Result};
pub use eval::{softmax, Classifier, Logits, SoftmaxOutput};
pub use homonet::{GradientPair, HomoNet};
pub use linalg::Matrix;
pub use mlpnet::{Activation, BiasMode, MlpNet};
pub use synthdata::{Dataset, DatasetConfig, Sample};
