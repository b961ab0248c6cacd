use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::elliptic;
use crate::{Error, Result};

/// Elliptic band-pass requirements.
///
/// `order` is the order of the low-pass prototype; the band-pass filter has
/// twice as many poles, realised as `order` second-order sections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandpassSpec {
    pub low_edge: f64,
    pub high_edge: f64,
    pub sample_rate: f64,
    pub passband_ripple: f64,
    pub stopband_atten: f64,
    pub order: usize,
}

impl BandpassSpec {
    pub const DEFAULT_ORDER: usize = 4;
    pub const DEFAULT_RIPPLE_DB: f64 = 1.0;
    pub const DEFAULT_ATTEN_DB: f64 = 40.0;

    pub fn new(low_edge: f64, high_edge: f64, sample_rate: f64) -> Self {
        Self {
            low_edge,
            high_edge,
            sample_rate,
            passband_ripple: Self::DEFAULT_RIPPLE_DB,
            stopband_atten: Self::DEFAULT_ATTEN_DB,
            order: Self::DEFAULT_ORDER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nyq = self.sample_rate / 2.0;
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::invalid("sample_rate", "must be > 0"));
        }
        if !(self.low_edge > 0.0) {
            return Err(Error::invalid("low_edge", format!("{} Hz must be > 0", self.low_edge)));
        }
        if !(self.low_edge < self.high_edge) {
            return Err(Error::invalid(
                "band",
                format!(
                    "low edge {} Hz must be below high edge {} Hz",
                    self.low_edge, self.high_edge
                ),
            ));
        }
        if !(self.high_edge < nyq) {
            return Err(Error::invalid(
                "high_edge",
                format!("{} Hz must be below Nyquist {} Hz", self.high_edge, nyq),
            ));
        }
        if !(self.passband_ripple > 0.0) {
            return Err(Error::invalid("passband_ripple", "must be > 0 dB"));
        }
        if !(self.stopband_atten > self.passband_ripple) {
            return Err(Error::invalid("stopband_atten", "must exceed the passband ripple"));
        }
        if !(1..=12).contains(&self.order) {
            return Err(Error::invalid("order", format!("{} not in 1..=12", self.order)));
        }
        Ok(())
    }
}

/// Biquad with a0 = 1: (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Section {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2) / (1.0 + self.a[0] * z_inv + self.a[1] * z2)
    }

    pub fn poles(&self) -> [Complex64; 2] {
        quadratic_roots(self.a[0], self.a[1])
    }
}

/// Roots of z^2 + c1 z + c0.
fn quadratic_roots(c1: f64, c0: f64) -> [Complex64; 2] {
    let disc = Complex64::new(c1 * c1 - 4.0 * c0, 0.0).sqrt();
    [(-c1 + disc) / 2.0, (-c1 - disc) / 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCoeffs {
    pub sections: Vec<Section>,
    pub gain: f64,
    pub spec: BandpassSpec,
    /// Frequencies (Hz) beyond which the attenuation is at least
    /// `spec.stopband_atten`.
    pub stopband_edges: (f64, f64),
}

impl FilterCoeffs {
    pub fn response(&self, freq: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq / self.spec.sample_rate);
        self.sections
            .iter()
            .fold(Complex64::new(self.gain, 0.0), |h, s| h * s.response(z_inv))
    }

    pub fn response_db(&self, freq: f64) -> f64 {
        20.0 * self.response(freq).norm().log10()
    }

    pub fn max_pole_radius(&self) -> f64 {
        self.sections
            .iter()
            .flat_map(|s| s.poles())
            .map(|p| p.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.max_pole_radius() < 1.0
    }

    /// Taps spanned by one pass of the cascade (2 per section plus one).
    pub fn effective_len(&self) -> usize {
        2 * self.sections.len() + 1
    }

    /// Default reflective padding for zero-phase application.
    pub fn default_pad_len(&self) -> usize {
        12 * self.effective_len()
    }

    /// Single forward pass, zero initial state.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().map(|v| v * self.gain).collect();
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for v in y.iter_mut() {
                let input = *v;
                let out = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[0] * out + z2;
                z2 = s.b[2] * input - s.a[1] * out;
                *v = out;
            }
        }
        y
    }

    /// Dense-grid check against the spec that produced these coefficients.
    pub fn conformance(&self, grid_points: usize) -> Conformance {
        let nyq = self.spec.sample_rate / 2.0;
        let (ls, us) = self.stopband_edges;
        let mut c = Conformance {
            grid_points,
            passband_min_db: f64::INFINITY,
            passband_max_db: f64::NEG_INFINITY,
            stopband_max_db: f64::NEG_INFINITY,
            stable: self.is_stable(),
            max_pole_radius: self.max_pole_radius(),
        };
        let n = grid_points.max(2);
        let freqs = (0..n).map(|i| nyq * i as f64 / (n - 1) as f64);
        // Band edges are included explicitly; the grid might straddle them.
        let edges = [self.spec.low_edge, self.spec.high_edge, ls, us];
        for f in freqs.chain(edges) {
            let g = self.response_db(f);
            if f >= self.spec.low_edge && f <= self.spec.high_edge {
                c.passband_min_db = c.passband_min_db.min(g);
                c.passband_max_db = c.passband_max_db.max(g);
            } else if f <= ls || f >= us {
                c.stopband_max_db = c.stopband_max_db.max(g);
            }
        }
        c
    }
}

/// Result of a dense-grid response check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conformance {
    pub grid_points: usize,
    pub passband_min_db: f64,
    pub passband_max_db: f64,
    pub stopband_max_db: f64,
    pub stable: bool,
    pub max_pole_radius: f64,
}

impl Conformance {
    /// Numerical slack for equiripple extrema landing exactly on a bound.
    pub const ROUNDOFF_DB: f64 = 1e-6;

    pub fn meets(&self, spec: &BandpassSpec) -> bool {
        self.stable
            && self.passband_max_db <= Self::ROUNDOFF_DB
            && self.passband_min_db >= -spec.passband_ripple - Self::ROUNDOFF_DB
            && self.stopband_max_db <= -spec.stopband_atten + Self::ROUNDOFF_DB
    }
}

/// Designs an elliptic band-pass as stable second-order sections.
///
/// Band edges are prewarped, the low-pass prototype is mapped to a band-pass
/// with s -> (s^2 + w0^2) / (s B) and discretised with the bilinear
/// transform. The passband is equiripple within [-ripple, 0] dB across
/// `[low_edge, high_edge]`, and the attenuation is at least `stopband_atten`
/// outside `stopband_edges`.
pub fn design_bandpass(spec: &BandpassSpec) -> Result<FilterCoeffs> {
    spec.validate()?;
    let fs = spec.sample_rate;
    let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
    let unwarp = |w: f64| fs / PI * (w / (2.0 * fs)).atan();
    let wl = warp(spec.low_edge);
    let wh = warp(spec.high_edge);
    let w0 = (wl * wh).sqrt();
    let bw = wh - wl;

    let proto = elliptic::prototype(spec.order, spec.passband_ripple, spec.stopband_atten);

    // Low-pass -> band-pass.
    let split = |r: Complex64| -> [Complex64; 2] {
        let half = r * bw / 2.0;
        let d = (half * half - w0 * w0).sqrt();
        [half + d, half - d]
    };
    let zeros_s: Vec<Complex64> = proto.zeros.iter().flat_map(|&z| split(z)).collect();
    let poles_s: Vec<Complex64> = proto.poles.iter().flat_map(|&p| split(p)).collect();
    let extra_origin_zeros = proto.poles.len() - proto.zeros.len();
    let gain_s = proto.gain * bw.powi(extra_origin_zeros as i32);

    // Bilinear.
    let fs2 = 2.0 * fs;
    let bilinear = |s: Complex64| (fs2 + s) / (fs2 - s);
    let mut zeros_z: Vec<Complex64> = zeros_s.iter().map(|&s| bilinear(s)).collect();
    zeros_z.extend(std::iter::repeat_n(Complex64::new(1.0, 0.0), extra_origin_zeros));
    let degree = poles_s.len() - zeros_s.len() - extra_origin_zeros;
    zeros_z.extend(std::iter::repeat_n(Complex64::new(-1.0, 0.0), degree));
    let poles_z: Vec<Complex64> = poles_s.iter().map(|&s| bilinear(s)).collect();
    let num: Complex64 = zeros_s.iter().map(|&z| fs2 - z).product::<Complex64>() * fs2.powi(extra_origin_zeros as i32);
    let den: Complex64 = poles_s.iter().map(|&p| fs2 - p).product();
    let gain = gain_s * (num / den).re;

    if let Some(p) = poles_z.iter().find(|p| p.norm() >= 1.0 - 1e-12) {
        return Err(Error::Design(format!(
            "pole at radius {:.15} is not strictly inside the unit circle; band edges are too \
             close to 0 Hz or Nyquist for order {}",
            p.norm(),
            spec.order
        )));
    }

    let sections = pair_sections(&zeros_z, &poles_z)?;

    // Stopband edges: the two band-pass images of the prototype edge.
    let ws = proto.stopband_edge * bw;
    let upper = 0.5 * (ws + (ws * ws + 4.0 * w0 * w0).sqrt());
    let lower = w0 * w0 / upper;
    let stopband_edges = (unwarp(lower), unwarp(upper));
    if !(stopband_edges.1 < fs / 2.0 && stopband_edges.0 > 0.0) {
        return Err(Error::Design(format!(
            "stopband edges {:?} Hz fall outside (0, Nyquist)",
            stopband_edges
        )));
    }

    let coeffs = FilterCoeffs {
        sections,
        gain,
        spec: *spec,
        stopband_edges,
    };
    if !coeffs.is_stable() {
        return Err(Error::Design(format!(
            "realised sections are unstable (max pole radius {})",
            coeffs.max_pole_radius()
        )));
    }
    Ok(coeffs)
}

/// Groups conjugate pairs into biquads. Pole pairs are taken from the one
/// farthest from the unit circle inwards; each takes the nearest remaining
/// zero pair.
fn pair_sections(zeros: &[Complex64], poles: &[Complex64]) -> Result<Vec<Section>> {
    const IM_TOL: f64 = 1e-10;
    let group = |roots: &[Complex64]| -> Vec<(Complex64, Complex64)> {
        let mut pairs = Vec::new();
        let mut reals: Vec<f64> = Vec::new();
        for r in roots {
            if r.im > IM_TOL {
                pairs.push((*r, r.conj()));
            } else if r.im.abs() <= IM_TOL {
                reals.push(r.re);
            }
        }
        reals.sort_by(|a, b| a.total_cmp(b));
        let mut it = reals.chunks(2);
        for chunk in &mut it {
            let a = Complex64::new(chunk[0], 0.0);
            let b = chunk
                .get(1)
                .map_or(Complex64::new(0.0, 0.0), |&v| Complex64::new(v, 0.0));
            pairs.push((a, b));
        }
        pairs
    };
    let mut pole_pairs = group(poles);
    let mut zero_pairs = group(zeros);
    if pole_pairs.len() < zero_pairs.len() {
        return Err(Error::Design("more zero pairs than pole pairs".into()));
    }
    pole_pairs.sort_by(|a, b| a.0.norm().total_cmp(&b.0.norm()));

    let coeffs_of = |(r1, r2): (Complex64, Complex64)| -> [f64; 3] {
        let s = r1 + r2;
        let p = r1 * r2;
        [1.0, -s.re, p.re]
    };
    let mut sections = Vec::with_capacity(pole_pairs.len());
    for pp in pole_pairs {
        let zc = if zero_pairs.is_empty() {
            [1.0, 0.0, 0.0]
        } else {
            let (idx, _) = zero_pairs
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z.0 - pp.0).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty");
            coeffs_of(zero_pairs.swap_remove(idx))
        };
        let ac = coeffs_of(pp);
        sections.push(Section {
            b: zc,
            a: [ac[1], ac[2]],
        });
    }
    Ok(sections)
}

/// Edge padding for zero-phase filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PadMode {
    /// Point reflection about each end sample: 2 x[0] - x[k].
    Odd,
    None,
}

/// Forward pass, reverse, second pass, reverse. Net phase is zero and the
/// magnitude response is squared.
///
/// Each end is extended by odd reflection over `pad_len` samples (default
/// [`FilterCoeffs::default_pad_len`], capped at `len - 1`) and both passes
/// start from zero state.
pub fn filter_zero_phase(coeffs: &FilterCoeffs, series: &[f64]) -> Result<Vec<f64>> {
    filter_zero_phase_with(coeffs, series, PadMode::Odd, None)
}

pub fn filter_zero_phase_with(
    coeffs: &FilterCoeffs,
    series: &[f64],
    pad: PadMode,
    pad_len: Option<usize>,
) -> Result<Vec<f64>> {
    let min = 3 * coeffs.effective_len();
    if series.len() <= min {
        return Err(Error::SeriesTooShort { got: series.len(), min });
    }
    let n = series.len();
    let pl = match pad {
        PadMode::None => 0,
        PadMode::Odd => pad_len.unwrap_or_else(|| coeffs.default_pad_len()).min(n - 1),
    };
    let mut ext = Vec::with_capacity(n + 2 * pl);
    let (first, last) = (series[0], series[n - 1]);
    ext.extend((1..=pl).rev().map(|k| 2.0 * first - series[k]));
    ext.extend_from_slice(series);
    ext.extend((1..=pl).map(|k| 2.0 * last - series[n - 1 - k]));

    let mut y = coeffs.filter(&ext);
    y.reverse();
    let mut y = coeffs.filter(&y);
    y.reverse();
    Ok(y[pl..pl + n].to_vec())
}
