//! Image-memorability experiment toolkit.
//!
//! Conventional photo-editing operators, image statistics (luma moments,
//! gradient, CIELAB gamut volume, multi-level contrast), face-dataset
//! preparation, score binning, pluggable memorability predictors and a
//! batch runner that measures how each edit shifts predicted scores.

pub mod analysis;
pub mod edits;
mod error;
pub mod faceprep;
pub mod imagecore;
pub mod labels;
pub mod metrics;
pub mod predictor;

pub use error::{Error, Result};
