//! Rate extraction chains.
//!
//! Both modalities end in the same two-band analysis: remove the mean,
//! band-pass into respiration and heartbeat bands, take a zero-padded
//! magnitude spectrum of each and search for the peak inside the band.
//! The contactless chain first turns de-chirped frames into a slow-time
//! phase series for each target range.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dsp::{
    self, bandwidth_3db, design_bandpass, filter_zero_phase, peak_search, spectrum_padded, unwrap_phase, BandpassSpec,
    FilterCoeffs, MagnitudeSpectrum, Window,
};
use crate::physio::{SubjectVitals, HEARTBEAT_BAND_HZ, RESPIRATION_BAND_HZ};
use crate::radar::{DechirpFrameSet, RadarTarget};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Shortest record the rate chains accept, s.
pub const MIN_RECORD_S: f64 = 5.0;

/// Band peaks below this fraction of the input's largest absolute value are
/// treated as absent. Scale-free, so it only catches round-off residue.
const DETECTION_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProcessingConfig {
    pub resp_band: (f64, f64),
    pub heart_band: (f64, f64),
    pub filter_order: usize,
    pub passband_ripple: f64,
    pub stopband_atten: f64,
    pub window: Window,
    /// Spectra are zero-padded to this multiple of the record length.
    pub zero_pad: usize,
    /// Forward-backward filtering; single forward pass when false.
    pub zero_phase: bool,
    /// Subtract the complex mean of the range-bin series before the
    /// arctangent.
    pub dc_compensation: bool,
    /// How far (in range bins) the selected peak may sit from the requested
    /// range.
    pub peak_tolerance_bins: usize,
    /// Minimum range-profile peak, relative to the strongest, for automatic
    /// target detection.
    pub detection_threshold: f64,
}

impl Default for ProcessingConfig {
    fn default() -> Self {
        Self {
            resp_band: RESPIRATION_BAND_HZ,
            heart_band: HEARTBEAT_BAND_HZ,
            filter_order: BandpassSpec::DEFAULT_ORDER,
            passband_ripple: BandpassSpec::DEFAULT_RIPPLE_DB,
            stopband_atten: BandpassSpec::DEFAULT_ATTEN_DB,
            window: Window::Rectangular,
            zero_pad: 16,
            zero_phase: true,
            dc_compensation: false,
            peak_tolerance_bins: 2,
            detection_threshold: 0.25,
        }
    }
}

impl ProcessingConfig {
    pub fn band_spec(&self, band: (f64, f64), sample_rate: f64) -> BandpassSpec {
        BandpassSpec {
            low_edge: band.0,
            high_edge: band.1,
            sample_rate,
            passband_ripple: self.passband_ripple,
            stopband_atten: self.stopband_atten,
            order: self.filter_order,
        }
    }

    fn filters(&self, sample_rate: f64) -> Result<(FilterCoeffs, FilterCoeffs)> {
        Ok((
            design_bandpass(&self.band_spec(self.resp_band, sample_rate))?,
            design_bandpass(&self.band_spec(self.heart_band, sample_rate))?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Contact,
    Contactless,
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modality::Contact => "contact",
            Modality::Contactless => "contactless",
        })
    }
}

/// One vital sign: the rate is per minute, frequencies are Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VitalEstimate {
    pub detected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// `rate` to one decimal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_display: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_freq_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined_freq_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_magnitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width_3db_hz: Option<f64>,
    /// A half-power crossing was not found and the spectrum edge was used.
    pub width_open: bool,
    /// The peak is the first or last bin of the search band.
    pub edge_peak: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<f64>,
    /// Monitored minus actual, per minute.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_display: Option<String>,
}

impl VitalEstimate {
    fn not_detected(truth: Option<f64>) -> Self {
        Self {
            detected: false,
            rate: None,
            rate_display: None,
            peak_freq_hz: None,
            refined_freq_hz: None,
            peak_magnitude: None,
            width_3db_hz: None,
            width_open: false,
            edge_peak: false,
            truth,
            error: None,
            error_display: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessingMetadata {
    pub resp_filter: BandpassSpec,
    pub heart_filter: BandpassSpec,
    pub window: Window,
    pub zero_phase: bool,
    pub zero_pad: usize,
    pub dc_compensation: bool,
    /// Records are shortened by keeping their beginning.
    pub truncation: String,
    /// Processing choices that are tool defaults rather than measured
    /// properties of the source system.
    pub assumptions: Vec<String>,
}

impl ProcessingMetadata {
    fn new(cfg: &ProcessingConfig, sample_rate: f64) -> Self {
        Self {
            resp_filter: cfg.band_spec(cfg.resp_band, sample_rate),
            heart_filter: cfg.band_spec(cfg.heart_band, sample_rate),
            window: cfg.window,
            zero_phase: cfg.zero_phase,
            zero_pad: cfg.zero_pad,
            dc_compensation: cfg.dc_compensation,
            truncation: "start-anchored".into(),
            assumptions: vec![
                format!(
                    "elliptic order {}, {} dB ripple, {} dB stopband are tool defaults",
                    cfg.filter_order, cfg.passband_ripple, cfg.stopband_atten
                ),
                format!(
                    "{} filtering is a tool default",
                    if cfg.zero_phase { "zero-phase" } else { "single-pass" }
                ),
                "chest displacement amplitudes of simulated subjects are tool defaults".into(),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VitalsReport {
    pub label: String,
    pub modality: Modality,
    pub respiration: VitalEstimate,
    pub heartbeat: VitalEstimate,
    /// Interpolated range-profile peak, m.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_estimate_m: Option<f64>,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub metadata: ProcessingMetadata,
}

/// Intermediate series behind a report, for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct VitalTraces {
    pub sample_rate: f64,
    /// Mean-removed input (intensity or unwrapped phase).
    pub input: Vec<f64>,
    pub respiration: Vec<f64>,
    pub heartbeat: Vec<f64>,
    pub resp_spectrum: MagnitudeSpectrum,
    pub heart_spectrum: MagnitudeSpectrum,
}

fn estimate(
    spectrum: &MagnitudeSpectrum,
    band: (f64, f64),
    floor: f64,
    truth_hz: Option<f64>,
) -> Result<VitalEstimate> {
    let truth = truth_hz.map(|f| f * 60.0);
    let Some(peak) = peak_search(spectrum, band)? else {
        return Ok(VitalEstimate::not_detected(truth));
    };
    if !(peak.peak_mag > floor) {
        return Ok(VitalEstimate::not_detected(truth));
    }
    let width = bandwidth_3db(spectrum, peak.peak_freq)?;
    let rate = peak.refined_freq * 60.0;
    let error = truth.map(|t| rate - t);
    Ok(VitalEstimate {
        detected: true,
        rate: Some(rate),
        rate_display: Some(format!("{rate:.1}")),
        peak_freq_hz: Some(peak.peak_freq),
        refined_freq_hz: Some(peak.refined_freq),
        peak_magnitude: Some(peak.peak_mag),
        width_3db_hz: Some(width.width),
        width_open: width.low_open || width.high_open,
        edge_peak: peak.edge_peak,
        truth,
        error,
        // Adding 0.0 folds -0.0 so tiny negative errors print as 0.0.
        error_display: error.map(|e| format!("{:.1}", (e * 10.0).round() / 10.0 + 0.0)),
    })
}

/// Ground-truth fundamentals (Hz) of a subject, respiration then heartbeat.
pub type TruthRates = (f64, f64);

fn truth_of(subject: &SubjectVitals) -> TruthRates {
    (subject.respiration_hz(), subject.heartbeat_hz())
}

/// Two-band analysis of a slow-time series (intensity or phase).
pub fn analyze_series(
    series: &[f64],
    sample_rate: f64,
    label: &str,
    modality: Modality,
    truth: Option<TruthRates>,
    cfg: &ProcessingConfig,
) -> Result<(VitalsReport, VitalTraces)> {
    let duration = series.len() as f64 / sample_rate;
    if !(sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", "must be > 0"));
    }
    if duration < MIN_RECORD_S - 1e-9 {
        return Err(Error::RecordTooShort {
            got_s: duration,
            min_s: MIN_RECORD_S,
        });
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid("series", format!("non-finite value at index {i}")));
    }
    let scale = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut input = series.to_vec();
    dsp::remove_mean(&mut input);

    let (rf, hf) = cfg.filters(sample_rate)?;
    let apply = |f: &FilterCoeffs| -> Result<Vec<f64>> {
        if cfg.zero_phase {
            filter_zero_phase(f, &input)
        } else {
            Ok(f.filter(&input))
        }
    };
    let respiration = apply(&rf)?;
    let heartbeat = apply(&hf)?;
    let fft_len = input.len() * cfg.zero_pad.max(1);
    let resp_spectrum = spectrum_padded(&respiration, sample_rate, cfg.window, fft_len)?;
    let heart_spectrum = spectrum_padded(&heartbeat, sample_rate, cfg.window, fft_len)?;
    let floor = DETECTION_FLOOR * scale;

    let report = VitalsReport {
        label: label.to_string(),
        modality,
        respiration: estimate(&resp_spectrum, cfg.resp_band, floor, truth.map(|t| t.0))?,
        heartbeat: estimate(&heart_spectrum, cfg.heart_band, floor, truth.map(|t| t.1))?,
        range_estimate_m: None,
        duration_s: duration,
        sample_rate,
        metadata: ProcessingMetadata::new(cfg, sample_rate),
    };
    let traces = VitalTraces {
        sample_rate,
        input,
        respiration,
        heartbeat,
        resp_spectrum,
        heart_spectrum,
    };
    Ok((report, traces))
}

/// Respiration and heartbeat rates from a detected FBG intensity series.
pub fn contact_rates(
    intensity: &[f64],
    sample_rate: f64,
    truth: Option<&SubjectVitals>,
    cfg: &ProcessingConfig,
) -> Result<VitalsReport> {
    contact_rates_with_traces(intensity, sample_rate, truth, cfg).map(|r| r.0)
}

pub fn contact_rates_with_traces(
    intensity: &[f64],
    sample_rate: f64,
    truth: Option<&SubjectVitals>,
    cfg: &ProcessingConfig,
) -> Result<(VitalsReport, VitalTraces)> {
    let label = truth.map_or("contact", |s| s.id.as_str());
    analyze_series(
        intensity,
        sample_rate,
        label,
        Modality::Contact,
        truth.map(truth_of),
        cfg,
    )
}

/// Slow-time average of the fast-time magnitude spectra, on a range axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeProfile {
    pub ranges: Vec<f64>,
    /// Mean over frames of |X_k| / fast_count.
    pub magnitudes: Vec<f64>,
    pub bin_width: f64,
}

impl RangeProfile {
    pub fn bin_of(&self, range: f64) -> usize {
        ((range / self.bin_width).round().max(0.0) as usize).min(self.ranges.len() - 1)
    }

    fn is_local_max(&self, k: usize) -> bool {
        let m = &self.magnitudes;
        m[k] > 0.0 && (k == 0 || m[k] >= m[k - 1]) && (k + 1 == m.len() || m[k] >= m[k + 1])
    }

    /// Range of bin `k` refined by a parabola through the log magnitudes of
    /// it and its neighbours.
    pub fn refined_range(&self, k: usize) -> f64 {
        let m = &self.magnitudes;
        if k == 0 || k + 1 >= m.len() {
            return self.ranges[k];
        }
        let ln = |v: f64| v.max(f64::MIN_POSITIVE).ln();
        self.ranges[k] + self.bin_width * dsp::peaks::parabolic_offset(ln(m[k - 1]), ln(m[k]), ln(m[k + 1]))
    }

    /// Local maxima at or above `threshold` times the strongest bin, strongest
    /// first, skipping the two lowest bins and anything within two bins of a
    /// stronger peak.
    pub fn peaks(&self, threshold: f64) -> Vec<usize> {
        let max = self.magnitudes.iter().skip(2).fold(0.0f64, |a, &b| a.max(b));
        if !(max > 0.0) {
            return Vec::new();
        }
        let mut cand: Vec<usize> = (2..self.magnitudes.len())
            .filter(|&k| self.is_local_max(k) && self.magnitudes[k] >= threshold * max)
            .collect();
        cand.sort_by(|&a, &b| self.magnitudes[b].total_cmp(&self.magnitudes[a]));
        let mut kept: Vec<usize> = Vec::new();
        for k in cand {
            if kept.iter().all(|&j| j.abs_diff(k) > 2) {
                kept.push(k);
            }
        }
        kept
    }
}

fn plan_rows<F>(frames: &DechirpFrameSet, per_row: F) -> Vec<Vec<f64>>
where
    F: Fn(&[Complex64]) -> Vec<f64> + Sync,
{
    let n = frames.fast_count;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    // Fixed-size chunks summed in order keep the result independent of the
    // thread count.
    frames
        .samples
        .par_chunks(n * 64)
        .map(|block| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            let mut acc: Vec<f64> = Vec::new();
            for row in block.chunks_exact(n) {
                for (b, &v) in buf.iter_mut().zip(row) {
                    *b = Complex64::new(v, 0.0);
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                let r = per_row(&buf);
                if acc.is_empty() {
                    acc = r;
                } else {
                    for (a, v) in acc.iter_mut().zip(r) {
                        *a += v;
                    }
                }
            }
            acc
        })
        .collect()
}

pub fn range_profile(frames: &DechirpFrameSet) -> Result<RangeProfile> {
    frames.validate()?;
    let n = frames.fast_count;
    let bins = n / 2 + 1;
    let partial = plan_rows(frames, |x| x[..bins].iter().map(|c| c.norm()).collect());
    let mut sum = vec![0.0; bins];
    for p in partial {
        for (s, v) in sum.iter_mut().zip(p) {
            *s += v;
        }
    }
    let norm = (frames.slow_count * n) as f64;
    let df = frames.fast_rate / n as f64;
    let bin_width = SPEED_OF_LIGHT * df / (2.0 * frames.chirp.chirp_rate);
    Ok(RangeProfile {
        ranges: (0..bins).map(|k| k as f64 * bin_width).collect(),
        magnitudes: sum.into_iter().map(|s| s / norm).collect(),
        bin_width,
    })
}

/// Unwrapped slow-time phase at one range bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPhase {
    /// Scaled so that a chest displacement dx moves it by 4 pi dx / lambda_c.
    pub phase: Vec<f64>,
    pub slow_rate: f64,
    pub range_bin: usize,
    pub bin_range_m: f64,
    pub range_estimate_m: f64,
}

/// Picks the profile peak within the tolerance of `target_range`.
pub fn select_range_bin(profile: &RangeProfile, target_range: f64, tolerance_bins: usize) -> Result<usize> {
    let last = profile.ranges.len() - 1;
    let want = target_range / profile.bin_width;
    if !(target_range >= 0.0) || want > last as f64 + tolerance_bins as f64 {
        return Err(Error::invalid(
            "target_range",
            format!(
                "{target_range} m is outside the profile (0 to {:.3} m)",
                profile.ranges[last]
            ),
        ));
    }
    let centre = (want.round() as usize).min(last);
    let lo = centre.saturating_sub(tolerance_bins);
    let hi = (centre + tolerance_bins).min(last);
    let best = (lo..=hi)
        .filter(|&k| profile.is_local_max(k))
        .max_by(|&a, &b| profile.magnitudes[a].total_cmp(&profile.magnitudes[b]));
    match best {
        Some(k) => Ok(k),
        None => {
            let nearest = profile
                .peaks(0.1)
                .into_iter()
                .min_by(|&a, &b| {
                    (profile.ranges[a] - target_range)
                        .abs()
                        .total_cmp(&(profile.ranges[b] - target_range).abs())
                })
                .map(|k| profile.ranges[k]);
            Err(Error::NoPeakNearRange {
                requested_m: target_range,
                nearest_m: nearest,
                tolerance_bins,
            })
        }
    }
}

pub fn extract_target_phase(frames: &DechirpFrameSet, target_range: f64, dc_compensation: bool) -> Result<TargetPhase> {
    let profile = range_profile(frames)?;
    let tol = ProcessingConfig::default().peak_tolerance_bins;
    extract_target_phase_with(frames, &profile, target_range, dc_compensation, tol)
}

/// Arctangent demodulation of the selected range bin.
///
/// Each frame contributes one tapered DFT coefficient at the selected bin. Its
/// phase is referenced to the middle of the acquisition window, where the
/// instantaneous transmit frequency is above the chirp start, so the
/// unwrapped series is rescaled by start / mid-window frequency.
pub fn extract_target_phase_with(
    frames: &DechirpFrameSet,
    profile: &RangeProfile,
    target_range: f64,
    dc_compensation: bool,
    tolerance_bins: usize,
) -> Result<TargetPhase> {
    frames.validate()?;
    let k = select_range_bin(profile, target_range, tolerance_bins)?;
    let n = frames.fast_count;
    // Symmetric Hann taper: its centre is the mid-window phase reference,
    // and its sidelobes keep the real signal's negative-frequency image out
    // of the selected bin.
    let twiddle: Vec<Complex64> = (0..n)
        .map(|i| {
            let taper = if n > 1 {
                0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()
            } else {
                1.0
            };
            Complex64::from_polar(taper, -2.0 * PI * (k * i) as f64 / n as f64)
        })
        .collect();
    let mut iq: Vec<Complex64> = frames
        .samples
        .par_chunks_exact(n)
        .map(|row| row.iter().zip(&twiddle).map(|(&v, &w)| w * v).sum())
        .collect();
    if dc_compensation {
        let mean = iq.iter().sum::<Complex64>() / iq.len() as f64;
        for v in &mut iq {
            *v -= mean;
        }
    }
    let wrapped: Vec<f64> = iq.iter().map(|c| c.im.atan2(c.re)).collect();
    let chirp = &frames.chirp;
    let mid_freq = chirp.start_freq + chirp.chirp_rate * (n - 1) as f64 / (2.0 * frames.fast_rate);
    let scale = chirp.start_freq / mid_freq;
    let phase = unwrap_phase(&wrapped).into_iter().map(|p| p * scale).collect();
    Ok(TargetPhase {
        phase,
        slow_rate: frames.slow_rate,
        range_bin: k,
        bin_range_m: profile.ranges[k],
        range_estimate_m: profile.refined_range(k),
    })
}

/// Ranges of the significant peaks of the profile, nearest first.
pub fn detect_targets(profile: &RangeProfile, cfg: &ProcessingConfig) -> Vec<f64> {
    let mut r: Vec<f64> = profile
        .peaks(cfg.detection_threshold)
        .into_iter()
        .map(|k| profile.refined_range(k))
        .collect();
    r.sort_by(f64::total_cmp);
    r
}

fn match_truth(truth: Option<&[RadarTarget]>, range: f64, tolerance_m: f64) -> Option<&RadarTarget> {
    truth?
        .iter()
        .filter(|t| (t.nominal_range - range).abs() <= tolerance_m)
        .min_by(|a, b| {
            (a.nominal_range - range)
                .abs()
                .total_cmp(&(b.nominal_range - range).abs())
        })
}

/// Rates for each requested target range.
///
/// Failures are reported per target; one bad range does not stop the
/// others. Truth, when given, is matched to each range by proximity.
pub fn contactless_rates(
    frames: &DechirpFrameSet,
    ranges: &[f64],
    truth: Option<&[RadarTarget]>,
    cfg: &ProcessingConfig,
) -> Result<Vec<Result<VitalsReport>>> {
    Ok(contactless_rates_with_traces(frames, ranges, truth, cfg)?
        .into_iter()
        .map(|r| r.map(|(report, _, _)| report))
        .collect())
}

pub type ContactlessOutcome = Result<(VitalsReport, VitalTraces, TargetPhase)>;

pub fn contactless_rates_with_traces(
    frames: &DechirpFrameSet,
    ranges: &[f64],
    truth: Option<&[RadarTarget]>,
    cfg: &ProcessingConfig,
) -> Result<Vec<ContactlessOutcome>> {
    if ranges.is_empty() {
        return Err(Error::invalid("targets", "at least one target range is required"));
    }
    let profile = range_profile(frames)?;
    let tol_m = cfg.peak_tolerance_bins as f64 * profile.bin_width;
    Ok(ranges
        .par_iter()
        .map(|&range| {
            let tp = extract_target_phase_with(frames, &profile, range, cfg.dc_compensation, cfg.peak_tolerance_bins)?;
            let matched = match_truth(truth, range, tol_m);
            let label = matched.map_or_else(|| format!("target@{range:.2}m"), |t| t.label().to_string());
            let (mut report, traces) = analyze_series(
                &tp.phase,
                tp.slow_rate,
                &label,
                Modality::Contactless,
                matched.map(|t| truth_of(&t.subject)),
                cfg,
            )?;
            report.range_estimate_m = Some(tp.range_estimate_m);
            Ok((report, traces, tp))
        })
        .collect())
}

/// What a record-length sweep runs on.
#[derive(Debug, Clone, Copy)]
pub enum SweepSource<'a> {
    Contact {
        series: &'a [f64],
        sample_rate: f64,
        truth: Option<&'a SubjectVitals>,
    },
    Contactless {
        frames: &'a DechirpFrameSet,
        ranges: &'a [f64],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub modality: Modality,
    pub duration_s: f64,
    /// Why the entry could not be processed, if it could not.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resp_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heart_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resp_3db_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heart_3db_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resp_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heart_error: Option<f64>,
}

impl SweepRow {
    fn from_report(duration: f64, r: &VitalsReport) -> Self {
        Self {
            label: r.label.clone(),
            modality: r.modality,
            duration_s: duration,
            flag: None,
            resp_rate: r.respiration.rate,
            heart_rate: r.heartbeat.rate,
            resp_3db_hz: r.respiration.width_3db_hz,
            heart_3db_hz: r.heartbeat.width_3db_hz,
            resp_error: r.respiration.error,
            heart_error: r.heartbeat.error,
        }
    }

    fn flagged(label: String, modality: Modality, duration: f64, why: String) -> Self {
        Self {
            label,
            modality,
            duration_s: duration,
            flag: Some(why),
            resp_rate: None,
            heart_rate: None,
            resp_3db_hz: None,
            heart_3db_hz: None,
            resp_error: None,
            heart_error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub truncation: String,
    pub rows: Vec<SweepRow>,
}

pub const DEFAULT_SWEEP_DURATIONS: [f64; 7] = [5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0];

/// Re-runs the rate chain on the first `d` seconds of the source for each
/// `d` in `durations`. Entries that cannot run are flagged, not fatal.
pub fn resolution_sweep(source: SweepSource<'_>, durations: &[f64], cfg: &ProcessingConfig) -> Result<SweepReport> {
    let rows_per_duration: Vec<Vec<SweepRow>> = durations.par_iter().map(|&d| sweep_one(source, d, cfg)).collect();
    let mut rows: Vec<SweepRow> = rows_per_duration.into_iter().flatten().collect();
    // Group by subject, durations ascending within each.
    rows.sort_by(|a, b| a.label.cmp(&b.label).then(a.duration_s.total_cmp(&b.duration_s)));
    Ok(SweepReport {
        truncation: "start-anchored".into(),
        rows,
    })
}

fn sweep_one(source: SweepSource<'_>, d: f64, cfg: &ProcessingConfig) -> Vec<SweepRow> {
    let too_short = |label: String, m: Modality| {
        SweepRow::flagged(label, m, d, format!("shorter than the {MIN_RECORD_S} s minimum"))
    };
    match source {
        SweepSource::Contact {
            series,
            sample_rate,
            truth,
        } => {
            let label = truth.map_or("contact".to_string(), |s| s.id.clone());
            let available = series.len() as f64 / sample_rate;
            if d < MIN_RECORD_S - 1e-9 {
                return vec![too_short(label, Modality::Contact)];
            }
            if d > available + 1e-9 {
                let why = format!("exceeds the {available:.3} s record");
                return vec![SweepRow::flagged(label, Modality::Contact, d, why)];
            }
            let n = ((d * sample_rate).round() as usize).min(series.len());
            match contact_rates(&series[..n], sample_rate, truth, cfg) {
                Ok(r) => vec![SweepRow::from_report(d, &r)],
                Err(e) => vec![SweepRow::flagged(label, Modality::Contact, d, e.to_string())],
            }
        }
        SweepSource::Contactless { frames, ranges } => {
            let truth = frames.truth.as_deref();
            let labels: Vec<String> = ranges
                .iter()
                .map(|&r| {
                    let tol = cfg.peak_tolerance_bins as f64 * SPEED_OF_LIGHT * frames.fast_rate
                        / (frames.fast_count as f64 * 2.0 * frames.chirp.chirp_rate);
                    match_truth(truth, r, tol).map_or_else(|| format!("target@{r:.2}m"), |t| t.label().to_string())
                })
                .collect();
            let flag_all = |why: String| -> Vec<SweepRow> {
                labels
                    .iter()
                    .map(|l| SweepRow::flagged(l.clone(), Modality::Contactless, d, why.clone()))
                    .collect()
            };
            if d < MIN_RECORD_S - 1e-9 {
                return labels
                    .iter()
                    .map(|l| too_short(l.clone(), Modality::Contactless))
                    .collect();
            }
            let cut = match frames.truncated(d) {
                Ok(c) => c,
                Err(e) => return flag_all(e.to_string()),
            };
            match contactless_rates(&cut, ranges, truth, cfg) {
                Ok(list) => list
                    .into_iter()
                    .zip(&labels)
                    .map(|(r, l)| match r {
                        Ok(rep) => SweepRow::from_report(d, &rep),
                        Err(e) => SweepRow::flagged(l.clone(), Modality::Contactless, d, e.to_string()),
                    })
                    .collect(),
                Err(e) => flag_all(e.to_string()),
            }
        }
    }
}
