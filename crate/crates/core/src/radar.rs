//! De-chirped receiver output for a scene of breathing subjects.
//!
//! Each slow-time row is one 60 us acquisition window. Chest positions are
//! sampled once per row and held for the whole window (stop-and-hop), so a
//! target at range R contributes a fast-time tone at
//! `2 chirp_rate R / c` with phase `4 pi R / lambda_c`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::photonic::ChirpParams;
use crate::physio::{synth_motion, SubjectVitals, TimeGrid};
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarTarget {
    pub subject: SubjectVitals,
    /// Antenna to chest-centre distance, m.
    pub nominal_range: f64,
    #[serde(default = "default_reflectivity")]
    pub reflectivity: f64,
}

fn default_reflectivity() -> f64 {
    1.0
}

impl RadarTarget {
    pub fn new(subject: SubjectVitals, nominal_range: f64) -> Self {
        Self {
            subject,
            nominal_range,
            reflectivity: 1.0,
        }
    }

    pub fn label(&self) -> &str {
        &self.subject.id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcquisitionParams {
    /// Fast-time sample rate, Sa/s.
    pub fast_rate: f64,
    /// Trigger period between acquisition windows, s.
    pub slow_period: f64,
    /// Length of each acquisition window, s.
    pub frame_width: f64,
    pub duration: f64,
    /// Standard deviation of the additive receiver noise, in units of the
    /// echo amplitude of a unit-reflectivity target at 1 m.
    pub noise_rms: f64,
    /// Echo amplitude falls as range^-exponent.
    pub amplitude_exponent: f64,
}

impl AcquisitionParams {
    pub const DEFAULT_NOISE_RMS: f64 = 0.5;
}

impl Default for AcquisitionParams {
    fn default() -> Self {
        Self {
            fast_rate: 10e6,
            slow_period: 20e-3,
            frame_width: 60e-6,
            duration: 60.0,
            noise_rms: Self::DEFAULT_NOISE_RMS,
            amplitude_exponent: 2.0,
        }
    }
}

impl AcquisitionParams {
    pub fn slow_count(&self) -> usize {
        (self.duration / self.slow_period + 1e-9).floor() as usize
    }

    pub fn fast_count(&self) -> usize {
        (self.frame_width * self.fast_rate).round() as usize
    }

    pub fn slow_rate(&self) -> f64 {
        1.0 / self.slow_period
    }

    pub fn slow_grid(&self) -> TimeGrid {
        TimeGrid {
            start: 0.0,
            sample_rate: self.slow_rate(),
            count: self.slow_count(),
        }
    }

    pub fn validate(&self, chirp: &ChirpParams) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.fast_rate) {
            return Err(Error::invalid("fast_rate", "must be > 0"));
        }
        if !positive(self.slow_period) || !positive(self.frame_width) || !positive(self.duration) {
            return Err(Error::invalid(
                "acquisition timing",
                "slow_period, frame_width and duration must be > 0",
            ));
        }
        if self.frame_width > chirp.pulse_width * (1.0 + 1e-9) {
            return Err(Error::invalid(
                "frame_width",
                format!(
                    "{} s exceeds the chirp pulse width {} s",
                    self.frame_width, chirp.pulse_width
                ),
            ));
        }
        if self.slow_period < chirp.pulse_period * (1.0 - 1e-9) {
            return Err(Error::invalid(
                "slow_period",
                format!(
                    "{} s is shorter than the chirp pulse period {} s",
                    self.slow_period, chirp.pulse_period
                ),
            ));
        }
        if self.fast_count() < 2 {
            return Err(Error::invalid(
                "frame_width",
                "fewer than 2 fast-time samples per frame",
            ));
        }
        if self.slow_count() < 1 {
            return Err(Error::invalid("duration", "shorter than one slow-time period"));
        }
        if !(self.noise_rms >= 0.0) {
            return Err(Error::invalid("noise_rms", "must be >= 0"));
        }
        if !self.amplitude_exponent.is_finite() {
            return Err(Error::invalid("amplitude_exponent", "must be finite"));
        }
        Ok(())
    }
}

/// Largest range whose beat tone stays below the fast-time Nyquist rate.
pub fn unambiguous_range(chirp: &ChirpParams, fast_rate: f64) -> f64 {
    SPEED_OF_LIGHT * (fast_rate / 2.0) / (2.0 * chirp.chirp_rate)
}

/// Beat frequency of a point target at `range`.
pub fn beat_frequency(chirp: &ChirpParams, range: f64) -> f64 {
    2.0 * chirp.chirp_rate * range / SPEED_OF_LIGHT
}

/// Slow-time by fast-time de-chirped samples, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DechirpFrameSet {
    pub samples: Vec<f64>,
    pub slow_count: usize,
    pub fast_count: usize,
    pub slow_rate: f64,
    pub fast_rate: f64,
    pub chirp: ChirpParams,
    pub acquisition: AcquisitionParams,
    pub truth: Option<Vec<RadarTarget>>,
}

impl DechirpFrameSet {
    pub fn row(&self, m: usize) -> &[f64] {
        &self.samples[m * self.fast_count..(m + 1) * self.fast_count]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.samples.chunks_exact(self.fast_count)
    }

    pub fn duration(&self) -> f64 {
        self.slow_count as f64 / self.slow_rate
    }

    /// Keeps the first `duration` seconds of slow time.
    pub fn truncated(&self, duration: f64) -> Result<DechirpFrameSet> {
        if !(duration > 0.0) {
            return Err(Error::invalid("duration", "must be > 0"));
        }
        let rows = (duration * self.slow_rate + 1e-9).floor() as usize;
        if rows > self.slow_count {
            return Err(Error::RecordTooShort {
                got_s: self.duration(),
                min_s: duration,
            });
        }
        let mut out = self.clone();
        out.samples.truncate(rows * self.fast_count);
        out.slow_count = rows;
        out.acquisition.duration = rows as f64 / self.slow_rate;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() != self.slow_count * self.fast_count {
            return Err(Error::LengthMismatch {
                what: "frame samples",
                got: self.samples.len(),
                expected: self.slow_count * self.fast_count,
            });
        }
        if self.fast_count < 2 || self.slow_count < 1 {
            return Err(Error::invalid("frame shape", "need at least 1 x 2 samples"));
        }
        if !(self.slow_rate > 0.0 && self.fast_rate > 0.0) {
            return Err(Error::invalid("frame rates", "must be > 0"));
        }
        if let Some(i) = self.samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "frame samples",
                format!("non-finite value at index {i}"),
            ));
        }
        Ok(())
    }
}

/// Synthesises de-chirped frames for `targets`.
///
/// Sample (m, n) is sum_j A_j cos(2 pi f_j(m) t_n + 4 pi R_j(m) / lambda_c)
/// plus receiver noise, with R_j(m) = R0_j + x_j(t_m), f_j the beat
/// frequency of R_j(m) and A_j = reflectivity_j / R0_j^exponent. Noise for
/// row m comes from its own ChaCha stream keyed by (seed, m), so the result
/// does not depend on evaluation order.
pub fn synth_dechirp_frames(
    targets: &[RadarTarget],
    chirp: &ChirpParams,
    acq: &AcquisitionParams,
    seed: u64,
) -> Result<DechirpFrameSet> {
    acq.validate(chirp)?;
    let r_max = unambiguous_range(chirp, acq.fast_rate);
    for t in targets {
        if !(t.nominal_range > 0.0) {
            return Err(Error::invalid(
                "nominal_range",
                format!("target '{}' has range {} m", t.label(), t.nominal_range),
            ));
        }
        if t.nominal_range >= r_max {
            return Err(Error::TargetOutOfRange {
                label: t.label().to_string(),
                range_m: t.nominal_range,
                max_m: r_max,
            });
        }
        if !(t.reflectivity >= 0.0) {
            return Err(Error::invalid(
                "reflectivity",
                format!("target '{}' has reflectivity {}", t.label(), t.reflectivity),
            ));
        }
    }
    let grid = acq.slow_grid();
    let slow_count = grid.count;
    let fast_count = acq.fast_count();

    struct Track {
        amplitude: f64,
        ranges: Vec<f64>,
    }
    let tracks = targets
        .iter()
        .map(|t| {
            let motion = synth_motion(&t.subject, &grid)?;
            Ok(Track {
                amplitude: t.reflectivity / t.nominal_range.powf(acq.amplitude_exponent),
                ranges: motion.iter().map(|x_mm| t.nominal_range + x_mm * 1e-3).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let noise = if acq.noise_rms > 0.0 {
        Some(Normal::new(0.0, acq.noise_rms).map_err(|e| Error::invalid("noise_rms", e.to_string()))?)
    } else {
        None
    };
    let phase_per_m = 4.0 * PI / chirp.carrier_wavelength;
    let dt = 1.0 / acq.fast_rate;

    let mut samples = vec![0.0; slow_count * fast_count];
    samples.par_chunks_mut(fast_count).enumerate().for_each(|(m, row)| {
        for tr in &tracks {
            let r = tr.ranges[m];
            let w = 2.0 * PI * beat_frequency(chirp, r) * dt;
            let phi = phase_per_m * r;
            for (n, v) in row.iter_mut().enumerate() {
                *v += tr.amplitude * (w * n as f64 + phi).cos();
            }
        }
        if let Some(normal) = &noise {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(m as u64);
            for v in row.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    });

    Ok(DechirpFrameSet {
        samples,
        slow_count,
        fast_count,
        slow_rate: acq.slow_rate(),
        fast_rate: acq.fast_rate,
        chirp: *chirp,
        acquisition: *acq,
        truth: Some(targets.to_vec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonic::{derive_chirp, IfLfmParams};
    use crate::physio::{Preset, SubjectVitals};

    fn chirp() -> ChirpParams {
        derive_chirp(&IfLfmParams::default()).unwrap()
    }

    fn still(id: &str) -> SubjectVitals {
        SubjectVitals {
            resp_amplitude: 0.0,
            heart_amplitude: 0.0,
            ..SubjectVitals::new(id, 12.0, 70.0)
        }
    }

    fn quiet(duration: f64) -> AcquisitionParams {
        AcquisitionParams {
            duration,
            noise_rms: 0.0,
            ..AcquisitionParams::default()
        }
    }

    #[test]
    fn unambiguous_range_default() {
        let r = unambiguous_range(&chirp(), 10e6);
        assert!((r - 11.2422).abs() < 1e-3, "{r}");
        assert!((unambiguous_range(&chirp(), 20e6) - 2.0 * r).abs() < 1e-9);
        assert!(r > 1.65);
    }

    #[test]
    fn beat_tone_at_one_metre() {
        let f = beat_frequency(&chirp(), 1.0);
        assert!((f - 444.75e3).abs() < 100.0, "{f}");
        let frames = synth_dechirp_frames(&[RadarTarget::new(still("s"), 1.0)], &chirp(), &quiet(0.1), 0).unwrap();
        // Zero crossings over the frame give the tone frequency.
        let row = frames.row(0);
        let crossings = row.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        let est = crossings as f64 / 2.0 / 60e-6;
        assert!((est - f).abs() < 2.0 / 60e-6, "{est}");
    }

    #[test]
    fn dimensions_full_record() {
        let acq = AcquisitionParams::default();
        assert_eq!(acq.slow_count(), 3000);
        assert_eq!(acq.fast_count(), 600);
        let frames = synth_dechirp_frames(&[], &chirp(), &quiet(60.0), 1).unwrap();
        assert_eq!(frames.samples.len(), 3000 * 600);
        assert!(frames.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_scene_with_noise() {
        let acq = AcquisitionParams {
            duration: 0.2,
            ..AcquisitionParams::default()
        };
        let f = synth_dechirp_frames(&[], &chirp(), &acq, 3).unwrap();
        let rms = (f.samples.iter().map(|v| v * v).sum::<f64>() / f.samples.len() as f64).sqrt();
        assert!((rms - acq.noise_rms).abs() < 0.05 * acq.noise_rms);
    }

    #[test]
    fn deterministic_under_seed() {
        let acq = AcquisitionParams {
            duration: 1.0,
            ..AcquisitionParams::default()
        };
        let t = [RadarTarget::new(SubjectVitals::preset(Preset::VolunteerB), 1.0)];
        let a = synth_dechirp_frames(&t, &chirp(), &acq, 9).unwrap();
        let b = synth_dechirp_frames(&t, &chirp(), &acq, 9).unwrap();
        let c = synth_dechirp_frames(&t, &chirp(), &acq, 10).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn superposition_noise_off() {
        let acq = quiet(0.5);
        let ta = RadarTarget::new(SubjectVitals::preset(Preset::VolunteerB), 1.0);
        let tb = RadarTarget::new(SubjectVitals::preset(Preset::VolunteerC), 1.65);
        let a = synth_dechirp_frames(std::slice::from_ref(&ta), &chirp(), &acq, 0).unwrap();
        let b = synth_dechirp_frames(std::slice::from_ref(&tb), &chirp(), &acq, 0).unwrap();
        let ab = synth_dechirp_frames(&[ta, tb], &chirp(), &acq, 0).unwrap();
        for ((x, y), z) in a.samples.iter().zip(&b.samples).zip(&ab.samples) {
            assert!((x + y - z).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_target_named() {
        let t = [RadarTarget::new(still("far"), 12.0)];
        match synth_dechirp_frames(&t, &chirp(), &quiet(0.1), 0) {
            Err(Error::TargetOutOfRange { label, max_m, .. }) => {
                assert_eq!(label, "far");
                assert!((max_m - 11.24).abs() < 0.01);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn acquisition_checks() {
        let c = chirp();
        let wide = AcquisitionParams {
            frame_width: 80e-6,
            ..AcquisitionParams::default()
        };
        assert!(wide.validate(&c).is_err());
        let fast = AcquisitionParams {
            slow_period: 50e-6,
            ..AcquisitionParams::default()
        };
        assert!(fast.validate(&c).is_err());
        let sparse = AcquisitionParams {
            fast_rate: 20e3,
            ..AcquisitionParams::default()
        };
        assert!(sparse.validate(&c).is_err());
    }

    #[test]
    fn truncation_is_start_anchored() {
        let acq = quiet(2.0);
        let t = [RadarTarget::new(SubjectVitals::preset(Preset::VolunteerC), 1.2)];
        let full = synth_dechirp_frames(&t, &chirp(), &acq, 0).unwrap();
        let cut = full.truncated(1.0).unwrap();
        assert_eq!(cut.slow_count, 50);
        assert_eq!(cut.samples[..], full.samples[..50 * 600]);
        assert!(full.truncated(3.0).is_err());
    }
}
