//! Per-artist play-count forecasting with from-scratch recurrent networks,
//! rolling-horizon prediction, classical baselines and F-score evaluation.

pub mod classical;
pub mod error;
pub mod eval;
pub mod features;
pub mod harness;
pub mod ingest;
pub mod matrix;
pub mod neural;
pub mod rpa;
pub mod seeds;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
