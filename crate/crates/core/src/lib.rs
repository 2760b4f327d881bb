//! LSTM autoencoder for multi-channel EEG: artifact detection through
//! reconstruction error, supervised artifact correction, synthetic data and
//! latent-space analysis.

mod binio;
mod error;

pub mod latent;
pub mod model;
pub mod nn;
pub mod pipeline;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
