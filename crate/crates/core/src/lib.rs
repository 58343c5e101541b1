//! Screening for arterial stenoses and aneurysms from pulse waveforms.
//!
//! The crate covers the whole pipeline: virtual patients with parametric
//! disease, a frequency-domain waveform surrogate, Fourier-series features,
//! six binary classifiers written from scratch, and the evaluation harness
//! that searches all 63 combinations of the six bilateral measurements.
// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod disease;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod fourier;
pub mod learners;
pub mod linalg;
pub mod network;
pub mod persistence;
pub mod population;
pub mod seed;
pub mod sites;
pub mod surrogate;

pub use error::{Error, Result};
