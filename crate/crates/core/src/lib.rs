//! Simulation and processing chain for combined contact and contactless
//! vital-sign monitoring over a WDM optical network.
//!
//! Contact sensing places an optical carrier on the falling edge of a fiber
//! Bragg grating notch, so chest-wall strain becomes an intensity change.
//! Contactless sensing uses a frequency-quadrupled LFM radar whose
//! de-chirped output carries chest motion in its phase.
//!
//! The crate is organised bottom-up:
//!
//! - [`physio`]: ground-truth chest-wall motion for each subject.
//! - [`photonic`]: FBG notch, modulator sidebands, contact transduction and
//!   derivation of the quadrupled transmit chirp.
//! - [`radar`]: slow-time by fast-time de-chirped frame synthesis.
//! - [`dsp`]: elliptic band-pass design, zero-phase filtering, spectra,
//!   phase unwrapping, peak search and 3-dB widths.
//! - [`pipelines`]: end-to-end rate extraction and the record-length sweep.
//! - [`scenario`]: multi-channel deployments and dataset bundles.
//! - [`io`]: on-disk formats (frame container, CSV, bundles, manifests).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsp;
pub mod error;
pub mod io;
pub mod photonic;
pub mod physio;
pub mod pipelines;
pub mod radar;
pub mod scenario;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
