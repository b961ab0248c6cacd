use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            // Periodic form; its coherent gain is exactly n/2.
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

/// Single-sided magnitude spectrum.
///
/// Magnitudes are |X_k| divided by the window sum, so a unit-amplitude
/// sinusoid centred on a bin reads 0.5 and a constant reads its value at DC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeSpectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub window: Window,
    /// Samples in the analysed series, before any zero padding.
    pub source_len: usize,
    pub fft_len: usize,
    pub sample_rate: f64,
}

impl MagnitudeSpectrum {
    pub fn bin_spacing(&self) -> f64 {
        self.sample_rate / self.fft_len as f64
    }

    /// Resolution of the underlying record, sample_rate / source_len.
    pub fn record_resolution(&self) -> f64 {
        self.sample_rate / self.source_len as f64
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// Mean signal power implied by the spectrum (rectangular window,
    /// no padding), i.e. the single-sided Parseval sum.
    pub fn mean_power(&self) -> f64 {
        let n = self.fft_len;
        self.magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let both_sides = k != 0 && !(n % 2 == 0 && k == n / 2);
                m * m * if both_sides { 2.0 } else { 1.0 }
            })
            .sum::<f64>()
            * (self.fft_len as f64 / self.source_len as f64)
    }
}

/// Complex DFT of a real series, computed with rustfft.
pub(crate) fn real_fft(series: &[f64], fft_len: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = series.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(fft_len, Complex64::new(0.0, 0.0));
    planner.plan_fft_forward(fft_len).process(&mut buf);
    buf
}

pub fn spectrum(series: &[f64], sample_rate: f64, window: Window) -> Result<MagnitudeSpectrum> {
    spectrum_padded(series, sample_rate, window, series.len())
}

/// Like [`spectrum`] but zero-pads to `fft_len` for a finer frequency grid.
pub fn spectrum_padded(series: &[f64], sample_rate: f64, window: Window, fft_len: usize) -> Result<MagnitudeSpectrum> {
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { got: n, min: 1 });
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::invalid("sample_rate", "must be > 0"));
    }
    if fft_len < n {
        return Err(Error::invalid(
            "fft_len",
            format!("{fft_len} is shorter than the series ({n})"),
        ));
    }
    let w = window.coefficients(n);
    let wsum: f64 = w.iter().sum();
    let windowed: Vec<f64> = series.iter().zip(&w).map(|(x, w)| x * w).collect();
    let x = real_fft(&windowed, fft_len, &mut FftPlanner::new());
    let bins = fft_len / 2 + 1;
    let df = sample_rate / fft_len as f64;
    Ok(MagnitudeSpectrum {
        frequencies: (0..bins).map(|k| k as f64 * df).collect(),
        magnitudes: x[..bins].iter().map(|c| c.norm() / wsum).collect(),
        window,
        source_len: n,
        fft_len,
        sample_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_spacing_one_rpm() {
        let s = spectrum(&vec![0.0; 3000], 50.0, Window::Rectangular).unwrap();
        assert!((s.bin_spacing() - 1.0 / 60.0).abs() < 1e-15);
        assert_eq!(s.len(), 1501);
    }

    #[test]
    fn impulse_is_flat() {
        let mut x = vec![0.0; 64];
        x[0] = 1.0;
        let s = spectrum(&x, 1.0, Window::Rectangular).unwrap();
        assert!(s.magnitudes.iter().all(|&m| (m - 1.0 / 64.0).abs() < 1e-15));
    }

    #[test]
    fn tone_on_bin() {
        let fs = 50.0;
        let x: Vec<f64> = (0..3000).map(|i| (2.0 * PI * 0.35 * i as f64 / fs).sin()).collect();
        let s = spectrum(&x, fs, Window::Rectangular).unwrap();
        let (k, m) = s
            .magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((s.frequencies[k] - 0.35).abs() < 1e-12);
        assert!((m - 0.5).abs() < 1e-12);
        let second = s
            .magnitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        assert!(second < 1e-9);
    }

    #[test]
    fn parseval() {
        for n in [255usize, 256] {
            let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
            let s = spectrum(&x, 10.0, Window::Rectangular).unwrap();
            let direct = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
            assert!((s.mean_power() - direct).abs() <= 1e-9 * direct);
        }
    }

    #[test]
    fn hann_coherent_gain() {
        let fs = 50.0;
        let x: Vec<f64> = (0..3000).map(|i| (2.0 * PI * 1.45 * i as f64 / fs).cos()).collect();
        let s = spectrum(&x, fs, Window::Hann).unwrap();
        let k = (1.45 / s.bin_spacing()).round() as usize;
        assert!((s.magnitudes[k] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn padding_refines_grid() {
        let x = vec![1.0; 100];
        let s = spectrum_padded(&x, 10.0, Window::Rectangular, 1600).unwrap();
        assert!((s.bin_spacing() - 10.0 / 1600.0).abs() < 1e-15);
        assert!((s.magnitudes[0] - 1.0).abs() < 1e-12);
        assert!(spectrum_padded(&x, 10.0, Window::Rectangular, 50).is_err());
    }
}
