//! Signal-processing kernels shared by the contact and contactless chains.

pub mod elliptic;
pub mod filter;
pub mod peaks;
pub mod phase;
pub mod spectrum;

pub use filter::{design_bandpass, filter_zero_phase, BandpassSpec, Conformance, FilterCoeffs, PadMode, Section};
pub use peaks::{bandwidth_3db, peak_search, Bandwidth, Peak};
pub use phase::{unwrap_phase, wrap_phase};
pub use spectrum::{spectrum, spectrum_padded, MagnitudeSpectrum, Window};

/// Subtracts the arithmetic mean in place.
pub fn remove_mean(series: &mut [f64]) {
    if series.is_empty() {
        return;
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    for v in series {
        *v -= mean;
    }
}
