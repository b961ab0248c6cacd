//! Ground-truth chest-wall motion.
//!
//! Displacement is a respiration fundamental plus an explicit list of
//! respiration harmonics, a heartbeat sinusoid and optional white Gaussian
//! motion noise. Amplitudes are in millimetres, rates in cycles per minute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Respiration band searched by the pipelines, Hz.
pub const RESPIRATION_BAND_HZ: (f64, f64) = (0.13, 0.5);
/// Heartbeat band searched by the pipelines, Hz.
pub const HEARTBEAT_BAND_HZ: (f64, f64) = (0.8, 1.9);

/// Default peak respiration displacement, mm.
pub const DEFAULT_RESP_AMPLITUDE_MM: f64 = 4.0;
/// Default peak heartbeat displacement, mm.
pub const DEFAULT_HEART_AMPLITUDE_MM: f64 = 0.3;

/// One respiration harmonic: `order` times the fundamental, with amplitude
/// `relative` times the respiration amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub order: u32,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectVitals {
    pub id: String,
    /// Respirations per minute.
    pub respiration_rate: f64,
    /// Beats per minute.
    pub heartbeat_rate: f64,
    #[serde(default = "default_resp_amplitude")]
    pub resp_amplitude: f64,
    #[serde(default = "default_heart_amplitude")]
    pub heart_amplitude: f64,
    #[serde(default)]
    pub resp_harmonics: Vec<Harmonic>,
    #[serde(default)]
    pub resp_phase: f64,
    #[serde(default)]
    pub heart_phase: f64,
    #[serde(default)]
    pub motion_noise_rms: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_resp_amplitude() -> f64 {
    DEFAULT_RESP_AMPLITUDE_MM
}

fn default_heart_amplitude() -> f64 {
    DEFAULT_HEART_AMPLITUDE_MM
}

/// Named subjects used by the built-in scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Contact subject of the single-channel run: 24 rpm, 73 bpm.
    SingleChannelContact,
    /// Contactless subject of the single-channel run at 0.88 m: 15 rpm, 81 bpm.
    SingleChannelRadar,
    /// Volunteer A of the two-channel run: 21 rpm, 87 bpm.
    VolunteerA,
    /// Volunteer B of the two-channel run: 12 rpm, 74 bpm, visible second
    /// respiration harmonic.
    VolunteerB,
    /// Volunteer C of the two-channel run: 18 rpm, 68 bpm.
    VolunteerC,
}

impl SubjectVitals {
    pub fn new(id: impl Into<String>, respiration_rate: f64, heartbeat_rate: f64) -> Self {
        Self {
            id: id.into(),
            respiration_rate,
            heartbeat_rate,
            resp_amplitude: DEFAULT_RESP_AMPLITUDE_MM,
            heart_amplitude: DEFAULT_HEART_AMPLITUDE_MM,
            resp_harmonics: Vec::new(),
            resp_phase: 0.0,
            heart_phase: 0.0,
            motion_noise_rms: 0.0,
            rng_seed: 0,
        }
    }

    /// Builds a preset subject.
    ///
    /// Presets are physiologically labelled, so respiration must dominate
    /// the chest motion and both fundamentals must sit inside their filter
    /// bands. Both are asserted here.
    pub fn preset(preset: Preset) -> Self {
        let subject = match preset {
            Preset::SingleChannelContact => Self::new("A", 24.0, 73.0).with_seed(11),
            Preset::SingleChannelRadar => Self::new("B", 15.0, 81.0).with_seed(12),
            Preset::VolunteerA => Self::new("A", 21.0, 87.0).with_seed(21),
            Preset::VolunteerB => Self {
                resp_harmonics: vec![Harmonic {
                    order: 2,
                    relative: 0.3,
                }],
                ..Self::new("B", 12.0, 74.0).with_seed(22)
            },
            Preset::VolunteerC => Self::new("C", 18.0, 68.0).with_seed(23),
        };
        subject.validate().expect("preset parameters are valid");
        assert!(
            subject.resp_amplitude > subject.heart_amplitude,
            "respiration must dominate chest motion for preset {}",
            subject.id
        );
        let (rl, rh) = RESPIRATION_BAND_HZ;
        let (hl, hh) = HEARTBEAT_BAND_HZ;
        let fr = subject.respiration_hz();
        let fh = subject.heartbeat_hz();
        assert!(
            (rl..=rh).contains(&fr) && (hl..=hh).contains(&fh),
            "preset {} fundamentals must sit inside their bands",
            subject.id
        );
        subject
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn respiration_hz(&self) -> f64 {
        self.respiration_rate / 60.0
    }

    pub fn heartbeat_hz(&self) -> f64 {
        self.heartbeat_rate / 60.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.respiration_rate > 0.0 && self.respiration_rate <= 60.0) {
            return Err(Error::invalid(
                "respiration_rate",
                format!("{} rpm is outside (0, 60]", self.respiration_rate),
            ));
        }
        if !(self.heartbeat_rate > 0.0 && self.heartbeat_rate <= 200.0) {
            return Err(Error::invalid(
                "heartbeat_rate",
                format!("{} bpm is outside (0, 200]", self.heartbeat_rate),
            ));
        }
        for (what, v) in [
            ("resp_amplitude", self.resp_amplitude),
            ("heart_amplitude", self.heart_amplitude),
            ("motion_noise_rms", self.motion_noise_rms),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(what, format!("{v} must be finite and >= 0")));
            }
        }
        for h in &self.resp_harmonics {
            if h.order < 2 || !(0.0..=1.0).contains(&h.relative) {
                return Err(Error::invalid(
                    "resp_harmonics",
                    format!(
                        "order {} / relative {} (need order >= 2, relative in [0, 1])",
                        h.order, h.relative
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Uniform sampling instants `start + n / sample_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub sample_rate: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn duration(&self) -> f64 {
        self.count as f64 / self.sample_rate
    }

    pub fn step(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn instant(&self, n: usize) -> f64 {
        self.start + n as f64 / self.sample_rate
    }

    pub fn instants(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(|n| self.instant(n))
    }
}

pub fn make_time_grid(duration: f64, sample_rate: f64) -> Result<TimeGrid> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("{duration} s must be > 0")));
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::invalid("sample_rate", format!("{sample_rate} Hz must be > 0")));
    }
    let count = (duration * sample_rate).round() as usize;
    if count == 0 {
        return Err(Error::invalid(
            "duration",
            format!("{duration} s at {sample_rate} Hz yields no samples"),
        ));
    }
    Ok(TimeGrid {
        start: 0.0,
        sample_rate,
        count,
    })
}

/// Chest-wall displacement in millimetres on `grid`.
///
/// Deterministic for a fixed `rng_seed`; the noise term is skipped entirely
/// when `motion_noise_rms` is zero.
pub fn synth_motion(subject: &SubjectVitals, grid: &TimeGrid) -> Result<Vec<f64>> {
    subject.validate()?;
    use std::f64::consts::TAU;
    let fr = subject.respiration_hz();
    let fh = subject.heartbeat_hz();
    let mut x: Vec<f64> = grid
        .instants()
        .map(|t| {
            let mut v = subject.resp_amplitude * (TAU * fr * t + subject.resp_phase).sin();
            for h in &subject.resp_harmonics {
                v += h.relative * subject.resp_amplitude * (TAU * h.order as f64 * fr * t).sin();
            }
            v + subject.heart_amplitude * (TAU * fh * t + subject.heart_phase).sin()
        })
        .collect();
    if subject.motion_noise_rms > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(subject.rng_seed);
        let normal = Normal::new(0.0, subject.motion_noise_rms)
            .map_err(|e| Error::invalid("motion_noise_rms", e.to_string()))?;
        for v in &mut x {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(x)
}
