use serde::{Deserialize, Serialize};

use super::spectrum::MagnitudeSpectrum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Frequency of the largest bin in the band.
    pub peak_freq: f64,
    pub peak_mag: f64,
    /// Vertex of a parabola through the log magnitudes of the peak bin and
    /// its neighbours.
    pub refined_freq: f64,
    /// The largest bin is the first or last bin of the band.
    pub edge_peak: bool,
}

fn band_indices(spec: &MagnitudeSpectrum, band: (f64, f64)) -> Result<(usize, usize)> {
    let (lo, hi) = band;
    let f = &spec.frequencies;
    if f.is_empty() || !(lo < hi) || lo < f[0] || hi > f[f.len() - 1] {
        return Err(Error::invalid(
            "band",
            format!(
                "[{lo}, {hi}] Hz is not inside the spectrum range [{}, {}] Hz",
                f.first().copied().unwrap_or(f64::NAN),
                f.last().copied().unwrap_or(f64::NAN)
            ),
        ));
    }
    let first = f.partition_point(|&v| v < lo);
    let end = f.partition_point(|&v| v <= hi);
    if end < first + 3 {
        return Err(Error::invalid(
            "band",
            format!(
                "[{lo}, {hi}] Hz holds {} bins, need at least 3",
                end.saturating_sub(first)
            ),
        ));
    }
    Ok((first, end - 1))
}

/// Offset in bins of the vertex of the parabola through (-1, a), (0, b), (1, c).
pub fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 || !denom.is_finite() {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

/// Largest bin inside `band` with sub-bin refinement.
///
/// Returns `Ok(None)` when every bin in the band is zero.
pub fn peak_search(spec: &MagnitudeSpectrum, band: (f64, f64)) -> Result<Option<Peak>> {
    let (first, last) = band_indices(spec, band)?;
    let m = &spec.magnitudes;
    let mut k = first;
    for i in first..=last {
        if m[i] > m[k] {
            k = i;
        }
    }
    if !(m[k] > 0.0) {
        return Ok(None);
    }
    let edge_peak = k == first || k == last;
    let df = spec.bin_spacing();
    let mut refined = spec.frequencies[k];
    let local_max = k > 0 && k + 1 < m.len() && m[k] >= m[k - 1] && m[k] >= m[k + 1];
    if local_max {
        let ln = |v: f64| v.max(f64::MIN_POSITIVE).ln();
        refined += df * parabolic_offset(ln(m[k - 1]), ln(m[k]), ln(m[k + 1]));
    }
    Ok(Some(Peak {
        peak_freq: spec.frequencies[k],
        peak_mag: m[k],
        refined_freq: refined,
        edge_peak,
    }))
}

/// Half-power width around a spectral peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    pub width: f64,
    pub low: f64,
    pub high: f64,
    /// No crossing below the peak; `low` is the first spectrum frequency.
    pub low_open: bool,
    /// No crossing above the peak; `high` is the last spectrum frequency.
    pub high_open: bool,
}

/// Width between the linearly interpolated half-power (1/sqrt 2 magnitude)
/// crossings on either side of the bin nearest `peak_freq`.
pub fn bandwidth_3db(spec: &MagnitudeSpectrum, peak_freq: f64) -> Result<Bandwidth> {
    let f = &spec.frequencies;
    let m = &spec.magnitudes;
    if f.is_empty() || peak_freq < f[0] || peak_freq > f[f.len() - 1] {
        return Err(Error::invalid(
            "peak_freq",
            format!("{peak_freq} Hz is outside the spectrum"),
        ));
    }
    let k = ((peak_freq - f[0]) / spec.bin_spacing()).round() as usize;
    let k = k.min(m.len() - 1);
    if !(m[k] > 0.0) {
        return Err(Error::invalid("peak_freq", "spectrum is zero at the peak"));
    }
    let thr = m[k] / std::f64::consts::SQRT_2;
    let cross = |i: usize, j: usize| -> f64 {
        // Linear interpolation between bin i (above threshold) and j (below).
        let t = (m[i] - thr) / (m[i] - m[j]);
        f[i] + t * (f[j] - f[i])
    };
    let (low, low_open) = match (0..k).rev().find(|&i| m[i] < thr) {
        Some(i) => (cross(i + 1, i), false),
        None => (f[0], true),
    };
    let (high, high_open) = match (k + 1..m.len()).find(|&i| m[i] < thr) {
        Some(i) => (cross(i - 1, i), false),
        None => (f[f.len() - 1], true),
    };
    Ok(Bandwidth {
        width: high - low,
        low,
        high,
        low_open,
        high_open,
    })
}
