//! Temporal localization of driver cell-phone behaviors.
//!
//! Videos are cut into overlapping 8 s clip windows, a small linear head
//! scores each window for behavior class and boundary inclusion, and the
//! per-window scores are aggregated back into labeled chunks of time. The
//! crate also carries a seeded synthetic data generator and the evaluation
//! metrics used to check the whole pipeline.
//!
//! With the default `parallel` feature, per-video and per-sample work runs on
//! rayon; without it the same code runs sequentially with identical results.

pub mod aggregation;
pub mod classifier;
pub mod domain;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod par;
pub mod pipeline;
pub mod rng;
pub mod split;
pub mod synthdata;
pub mod windowing;

pub use error::{Error, Result};
