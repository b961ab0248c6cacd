//! Envelope-level models of the optical front end.
//!
//! Optical fields are never sampled at optical rates. The FBG is a Gaussian
//! notch in dB, the MATP-biased modulator is reduced to its Bessel sideband
//! weights, and the low-speed photodiode is an ideal power detector.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::physio::TimeGrid;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Intermediate-frequency LFM drive of the modulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfLfmParams {
    /// Centre frequency f_C, Hz.
    pub center_freq: f64,
    /// Sweep bandwidth f_B, Hz.
    pub bandwidth: f64,
    /// Pulse repetition period, s.
    pub pulse_period: f64,
    /// Pulse width T_p, s.
    pub pulse_width: f64,
}

impl Default for IfLfmParams {
    /// 6.6 GHz centre, 1 GHz bandwidth, 100 us period, 60 us pulse.
    fn default() -> Self {
        Self {
            center_freq: 6.6e9,
            bandwidth: 1.0e9,
            pulse_period: 100e-6,
            pulse_width: 60e-6,
        }
    }
}

impl IfLfmParams {
    /// Chirp rate k = f_B / T_p.
    pub fn chirp_rate(&self) -> f64 {
        self.bandwidth / self.pulse_width
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0) {
            return Err(Error::invalid("bandwidth", "must be > 0"));
        }
        if !(self.center_freq - 0.5 * self.bandwidth > 0.0) {
            return Err(Error::invalid(
                "center_freq",
                "sweep must start above 0 Hz (f_C > f_B / 2)",
            ));
        }
        if !(self.pulse_width > 0.0 && self.pulse_width <= self.pulse_period) {
            return Err(Error::invalid(
                "pulse_width",
                format!(
                    "{} s must lie in (0, pulse_period = {} s]",
                    self.pulse_width, self.pulse_period
                ),
            ));
        }
        Ok(())
    }
}

/// The frequency-quadrupled transmit chirp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpParams {
    /// 4 f_C - 2 f_B, Hz.
    pub start_freq: f64,
    /// 4 f_B, Hz.
    pub sweep_bandwidth: f64,
    /// 4 k, Hz/s.
    pub chirp_rate: f64,
    pub pulse_period: f64,
    pub pulse_width: f64,
    /// c / start_freq, m.
    pub carrier_wavelength: f64,
}

impl ChirpParams {
    pub fn center_freq(&self) -> f64 {
        self.start_freq + 0.5 * self.sweep_bandwidth
    }

    /// Instantaneous transmit frequency `t` seconds into the sweep.
    pub fn instantaneous_freq(&self, t: f64) -> f64 {
        self.start_freq + self.chirp_rate * t
    }
}

pub fn derive_chirp(if_params: &IfLfmParams) -> Result<ChirpParams> {
    if_params.validate()?;
    let start_freq = 4.0 * if_params.center_freq - 2.0 * if_params.bandwidth;
    Ok(ChirpParams {
        start_freq,
        sweep_bandwidth: 4.0 * if_params.bandwidth,
        chirp_rate: 4.0 * if_params.chirp_rate(),
        pulse_period: if_params.pulse_period,
        pulse_width: if_params.pulse_width,
        carrier_wavelength: SPEED_OF_LIGHT / start_freq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NotchShape {
    Gaussian,
}

/// FBG transmission notch and the carrier's position on its edge.
///
/// Offsets are measured from the notch centre; a positive carrier offset
/// sits on the edge where a positive chest displacement (which moves the
/// notch up by `kappa * x`) lowers transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbgProfile {
    /// Notch depth below the passband, dB.
    pub notch_depth_db: f64,
    /// Full width at the -3 dB level, Hz.
    pub fwhm_3db_hz: f64,
    #[serde(default = "default_shape")]
    pub shape: NotchShape,
    /// Bragg shift per millimetre of chest displacement, Hz/mm.
    #[serde(default = "default_kappa")]
    pub displacement_to_shift_hz_per_mm: f64,
    /// Carrier offset from the notch centre at rest, Hz. `None` selects the
    /// maximum-slope point of the linear transmittance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_operating_offset_hz: Option<f64>,
}

fn default_shape() -> NotchShape {
    NotchShape::Gaussian
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA_HZ_PER_MM
}

/// Default Bragg shift per millimetre of chest displacement.
pub const DEFAULT_KAPPA_HZ_PER_MM: f64 = 0.2e9;

impl FbgProfile {
    /// FBG1: 17.70 dB deep, 11.2 GHz wide.
    pub fn fbg1() -> Self {
        Self::new(17.70, 11.2e9)
    }

    /// FBG2: 17.76 dB deep, 10 GHz wide.
    pub fn fbg2() -> Self {
        Self::new(17.76, 10.0e9)
    }

    pub fn new(notch_depth_db: f64, fwhm_3db_hz: f64) -> Self {
        Self {
            notch_depth_db,
            fwhm_3db_hz,
            shape: NotchShape::Gaussian,
            displacement_to_shift_hz_per_mm: DEFAULT_KAPPA_HZ_PER_MM,
            carrier_operating_offset_hz: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.notch_depth_db > 3.0) {
            return Err(Error::invalid(
                "notch_depth_db",
                format!(
                    "{} dB: the 3-dB width is undefined unless the notch is deeper than 3 dB",
                    self.notch_depth_db
                ),
            ));
        }
        if !(self.fwhm_3db_hz > 0.0) {
            return Err(Error::invalid("fwhm_3db_hz", "must be > 0"));
        }
        Ok(())
    }

    /// Gaussian width parameter such that the dB profile crosses -3 dB at
    /// +-fwhm/2.
    pub fn sigma_hz(&self) -> f64 {
        self.fwhm_3db_hz / (2.0 * (2.0 * (self.notch_depth_db / 3.0).ln()).sqrt())
    }

    /// Notch centre relative to the carrier at rest.
    pub fn bragg_offset_hz(&self) -> f64 {
        -self.operating_offset_hz()
    }

    pub fn operating_offset_hz(&self) -> f64 {
        self.carrier_operating_offset_hz
            .unwrap_or_else(|| self.max_slope_offset_hz())
    }

    /// Offset where |d T_lin / d f| peaks, i.e. the inflection of the linear
    /// transmittance.
    ///
    /// With u = f^2 / (2 sigma^2) and a = depth ln(10) / 10 the condition is
    /// 1 / (2u) - 1 + a exp(-u) = 0, which is strictly decreasing in u.
    pub fn max_slope_offset_hz(&self) -> f64 {
        let a = self.notch_depth_db * std::f64::consts::LN_10 / 10.0;
        let g = |u: f64| 0.5 / u - 1.0 + a * (-u).exp();
        let (mut lo, mut hi) = (1e-9, 1.0);
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.sigma_hz() * (2.0 * 0.5 * (lo + hi)).sqrt()
    }

    /// dB-domain inflection point (one sigma from the notch centre).
    pub fn db_inflection_offset_hz(&self) -> f64 {
        self.sigma_hz()
    }
}

/// Transmission in dB at `freq_offset` from the notch centre.
pub fn fbg_transmission_db(fbg: &FbgProfile, freq_offset: f64) -> Result<f64> {
    fbg.validate()?;
    let s = fbg.sigma_hz();
    Ok(-fbg.notch_depth_db * (-freq_offset * freq_offset / (2.0 * s * s)).exp())
}

/// Linear power transmittance at `freq_offset` from the notch centre.
pub fn fbg_transmission(fbg: &FbgProfile, freq_offset: f64) -> Result<f64> {
    Ok(10f64.powf(fbg_transmission_db(fbg, freq_offset)? / 10.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactIntensity {
    /// Detected power, same units as the carrier and sideband powers.
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    /// Carrier offset from the notch centre over the record, Hz.
    pub offset_range_hz: (f64, f64),
    /// Set when the excursion leaves +-3 sigma or crosses the notch centre.
    pub edge_warning: bool,
}

/// Detected FBG output for a chest-wall displacement series.
///
/// P(t) = carrier T(offset - kappa x(t)) + 2 sideband, times (1 + noise_rms n(t))
/// with n standard normal. The sidebands sit in the FBG passband and the
/// beat terms fall far outside the low-speed detector band.
pub fn contact_intensity(
    motion_mm: &[f64],
    fbg: &FbgProfile,
    carrier_power: f64,
    sideband_power: f64,
    noise_rms: f64,
    grid: &TimeGrid,
    seed: u64,
) -> Result<ContactIntensity> {
    fbg.validate()?;
    if motion_mm.len() != grid.count {
        return Err(Error::LengthMismatch {
            what: "motion series",
            got: motion_mm.len(),
            expected: grid.count,
        });
    }
    if !(carrier_power >= 0.0 && sideband_power >= 0.0) {
        return Err(Error::invalid("power", "carrier and sideband powers must be >= 0"));
    }
    if !(noise_rms >= 0.0) {
        return Err(Error::invalid("noise_rms", "must be >= 0"));
    }
    let op = fbg.operating_offset_hz();
    let kappa = fbg.displacement_to_shift_hz_per_mm;
    let sigma = fbg.sigma_hz();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut samples = Vec::with_capacity(motion_mm.len());
    for &x in motion_mm {
        let df = op - kappa * x;
        lo = lo.min(df);
        hi = hi.max(df);
        let t_db = -fbg.notch_depth_db * (-df * df / (2.0 * sigma * sigma)).exp();
        samples.push(carrier_power * 10f64.powf(t_db / 10.0) + 2.0 * sideband_power);
    }
    if noise_rms > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_rms).map_err(|e| Error::invalid("noise_rms", e.to_string()))?;
        for p in &mut samples {
            *p *= 1.0 + normal.sample(&mut rng);
        }
    }
    let edge_warning = lo.abs().max(hi.abs()) > 3.0 * sigma || lo * hi <= 0.0;
    Ok(ContactIntensity {
        samples,
        sample_rate: grid.sample_rate,
        offset_range_hz: (lo, hi),
        edge_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Bias {
    /// Maximum transmission point: even-order sidebands only.
    Matp,
    /// Quadrature point: linear intensity modulation.
    Qtp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatorModel {
    pub modulation_index: f64,
    pub bias: Bias,
}

impl Default for ModulatorModel {
    fn default() -> Self {
        Self {
            modulation_index: 1.0,
            bias: Bias::Matp,
        }
    }
}

/// Field weights of the optical carrier and each +-2nd-order sideband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandWeights {
    pub carrier: f64,
    pub second_order: f64,
}

impl SidebandWeights {
    /// Power fractions (carrier, each second-order sideband).
    pub fn powers(&self) -> (f64, f64) {
        (self.carrier.powi(2), self.second_order.powi(2))
    }
}

/// Carrier and second-order weights J0(m), J2(m) of a push-pull MZM at MATP.
///
/// Total carried power J0^2 + 2 J2^2 never exceeds the input power.
pub fn sideband_weights(modulator: &ModulatorModel) -> Result<SidebandWeights> {
    if modulator.bias != Bias::Matp {
        return Err(Error::Unsupported(
            "sideband weights are defined for MATP bias only; the QTP path is part of the \
             analytic de-chirp model"
                .into(),
        ));
    }
    let m = modulator.modulation_index;
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::invalid("modulation_index", "must be > 0"));
    }
    Ok(SidebandWeights {
        carrier: bessel_j(0, m),
        second_order: bessel_j(2, m),
    })
}

/// Bessel function of the first kind by its power series. Accurate to
/// ~1e-15 for |x| <= 10, which covers every usable modulation index.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(order as i32) / (1..=order).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200u32 {
        term *= -half * half / (f64::from(k) * f64::from(k + order));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}
