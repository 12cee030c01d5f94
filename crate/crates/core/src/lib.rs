//! Decentralized first-order optimization over unbalanced directed graphs.
//!
//! The crate simulates agents that only push information along directed
//! links, mixing with a column-stochastic matrix and correcting for the
//! imbalance with push-sum weights. It provides the accelerated gradient
//! tracking methods [`optimizers::apd_run`] (smooth convex objectives,
//! `O(1/k²)`) and [`optimizers::apdsc_run`] (strongly convex objectives,
//! accelerated linear rate), the Push-DIGing and Subgradient-Push baselines,
//! diagnostics for consensus errors and Lyapunov potentials, and an
//! experiment harness that writes CSV traces and SVG plots.
//!
//! Numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases
//! below fix the precision used by the harness.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod objectives;
pub mod optimizers;
mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type MixingMatrix64 = graph::MixingMatrix<f64>;
pub type NormTransform64 = graph::NormTransform<f64>;
pub type ObjectiveSuite64 = objectives::ObjectiveSuite<f64>;
pub type LabeledDataset64 = objectives::LabeledDataset<f64>;
pub type SolverState64 = optimizers::SolverState<f64>;
pub type ApdParams64 = optimizers::ApdParams<f64>;
pub type ApdScParams64 = optimizers::ApdScParams<f64>;
