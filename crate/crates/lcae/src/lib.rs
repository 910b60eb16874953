//! File formats, timing, synthetic data and the command-line front end for
//! the label-consistent autoencoder in `lcae-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod model_file;
pub mod par;
pub mod sensing_file;
pub mod synth;
pub mod timing;
pub mod windows_csv;

pub use error::{Error, Result};
