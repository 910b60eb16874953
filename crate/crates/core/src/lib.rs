//! Core numerics for the label-consistent autoencoder pipeline.
//!
//! Everything in this crate is allocation-only (`no_std` + `alloc`): dense
//! matrices and closed-form solvers, the sparse binary sensing operator,
//! OMP/ISTA recovery baselines, the two-layer label-consistent autoencoder,
//! its split Bregman trainer, signal preparation and evaluation metrics.
//! File formats, timing and the command line live in the `lcae` crate.
//!
//! Samples are stored as matrix columns throughout.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form used by every argument check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numkit;
pub mod rng;
pub mod sensing;
pub mod signal;
pub mod trainer;

pub use error::{Error, Result};
pub use model::{ClassScores, LayerSizes, LcaeModel};
pub use numkit::Mat;
pub use sensing::SensingMatrix;
pub use signal::{Dataset, NormStats, WindowSet};
pub use trainer::{BregmanRule, TrainConfig, TrainState};
