//! Desk-scale EEG-to-prosthetic-arm pipeline.
//!
//! Signal flow: [`synth`] generates four-channel EEG-like samples, [`dsp`]
//! cleans them and turns 256-sample windows into 20 band-power features,
//! [`transport`] ships frames over UDP and action bytes over a simulated
//! serial line, [`dataset`] builds windowed training sets, [`model`]
//! classifies windows into one of three actions and [`actuator`] drives a
//! simulated 4-joint arm.

pub mod actuator;
pub mod clock;
pub mod container;
pub mod dataset;
pub mod dsp;
pub mod error;
pub mod label;
pub mod model;
pub mod synth;
pub mod transport;

pub use error::{Error, Result};
pub use label::{ActionLabel, BrainState, FEATURE_DIM, NUM_BANDS, NUM_CHANNELS, NUM_CLASSES};
