//! Multi-channel WDM deployments.
//!
//! A scenario lists optical channels, what each terminal does (contact
//! FBG sensing, contactless radar or both), and who is being monitored.
//! Channels share nothing but the global seed; each channel's random
//! streams are derived from (global seed, wavelength) so adding or removing
//! channels never changes the others.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::photonic::{contact_intensity, derive_chirp, ContactIntensity, FbgProfile, IfLfmParams};
use crate::physio::{make_time_grid, synth_motion, Preset, SubjectVitals, TimeGrid};
use crate::pipelines::{
    contact_rates, contactless_rates, detect_targets, range_profile, ProcessingConfig, VitalsReport,
};
use crate::radar::{synth_dechirp_frames, unambiguous_range, AcquisitionParams, DechirpFrameSet, RadarTarget};
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Contact,
    Contactless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WdmChannel {
    pub wavelength_nm: f64,
    pub roles: BTreeSet<Role>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fbg: Option<FbgProfile>,
    #[serde(default)]
    pub if_lfm: IfLfmParams,
    #[serde(default)]
    pub fiber_length_km: f64,
    #[serde(default = "default_fiber_loss")]
    pub fiber_loss_db_per_km: f64,
}

fn default_fiber_loss() -> f64 {
    0.2
}

impl WdmChannel {
    pub fn new(wavelength_nm: f64, roles: &[Role]) -> Self {
        Self {
            wavelength_nm,
            roles: roles.iter().copied().collect(),
            fbg: None,
            if_lfm: IfLfmParams::default(),
            fiber_length_km: 0.0,
            fiber_loss_db_per_km: default_fiber_loss(),
        }
    }

    pub fn with_fbg(mut self, fbg: FbgProfile) -> Self {
        self.fbg = Some(fbg);
        self
    }

    pub fn key(&self) -> String {
        channel_key(self.wavelength_nm)
    }

    pub fn has(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }

    /// Power transmission of the fibre link.
    pub fn link_power_scale(&self) -> f64 {
        10f64.powf(-self.fiber_loss_db_per_km * self.fiber_length_km / 10.0)
    }
}

/// Map key and directory suffix for a channel: wavelength in nm, two
/// decimals.
pub fn channel_key(wavelength_nm: f64) -> String {
    format!("{wavelength_nm:.2}")
}

/// Detection settings of the contact path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactSettings {
    pub sample_rate: f64,
    pub carrier_power: f64,
    /// Power of each of the two second-order sidebands.
    pub sideband_power: f64,
    /// Relative multiplicative noise on the detected power.
    pub noise_rms: f64,
}

impl ContactSettings {
    pub const DEFAULT_NOISE_RMS: f64 = 2e-3;
}

impl Default for ContactSettings {
    fn default() -> Self {
        Self {
            sample_rate: 50.0,
            carrier_power: 1.0,
            sideband_power: 0.05,
            noise_rms: Self::DEFAULT_NOISE_RMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Record length, s. Overrides `acquisition.duration`.
    pub duration: f64,
    #[serde(default)]
    pub contact: ContactSettings,
    /// Radar acquisition; required when any channel is contactless.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acquisition: Option<AcquisitionParams>,
    pub channels: Vec<WdmChannel>,
    /// Keyed by channel wavelength (see [`channel_key`]).
    #[serde(default)]
    pub contact_subjects: BTreeMap<String, SubjectVitals>,
    #[serde(default)]
    pub radar_scenes: BTreeMap<String, Vec<RadarTarget>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, code: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            code: code.into(),
            message: message.into(),
        });
    }
}

/// ITU-T G.694.1 anchor and the 50 GHz grid spacing.
const ITU_ANCHOR_HZ: f64 = 193.1e12;
const ITU_SPACING_HZ: f64 = 50e9;
const ITU_TOLERANCE_HZ: f64 = 2.5e9;

/// Offset of a wavelength from the nearest 50 GHz ITU grid frequency, Hz.
pub fn itu_grid_offset_hz(wavelength_nm: f64) -> f64 {
    let f = SPEED_OF_LIGHT / (wavelength_nm * 1e-9);
    let n = ((f - ITU_ANCHOR_HZ) / ITU_SPACING_HZ).round();
    f - (ITU_ANCHOR_HZ + n * ITU_SPACING_HZ)
}

fn find_channel<'a>(s: &'a Scenario, key: &str) -> Option<&'a WdmChannel> {
    let wl: f64 = key.trim().parse().ok()?;
    s.channels.iter().find(|c| (c.wavelength_nm - wl).abs() < 5e-3)
}

fn check_rates(r: &mut ValidationReport, who: &str, subject: &SubjectVitals) {
    if let Err(e) = subject.validate() {
        r.violation("invalid subject", format!("{who}: {e}"));
        return;
    }
    let cfg = ProcessingConfig::default();
    let (rl, rh) = cfg.resp_band;
    let (hl, hh) = cfg.heart_band;
    let fr = subject.respiration_hz();
    let fh = subject.heartbeat_hz();
    if !(rl..=rh).contains(&fr) {
        r.violation(
            "out-of-band rate",
            format!(
                "{who}: respiration {} rpm outside {:.1}-{:.1} rpm",
                subject.respiration_rate,
                rl * 60.0,
                rh * 60.0
            ),
        );
    }
    if !(hl..=hh).contains(&fh) {
        r.violation(
            "out-of-band rate",
            format!(
                "{who}: heartbeat {} bpm outside {:.1}-{:.1} bpm",
                subject.heartbeat_rate,
                hl * 60.0,
                hh * 60.0
            ),
        );
    }
}

/// Collects every problem with a scenario; an empty violation list means it
/// can be run.
pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mut r = ValidationReport::default();
    if !(s.duration > 0.0 && s.duration.is_finite()) {
        r.violation("invalid duration", format!("{} s", s.duration));
    } else if s.duration < crate::pipelines::MIN_RECORD_S {
        r.warnings.push(format!(
            "duration {} s is below the {} s needed for rate extraction",
            s.duration,
            crate::pipelines::MIN_RECORD_S
        ));
    }
    let c = &s.contact;
    if !(c.sample_rate > 0.0) || !(c.carrier_power >= 0.0) || !(c.sideband_power >= 0.0) || !(c.noise_rms >= 0.0) {
        r.violation(
            "invalid contact settings",
            "sample_rate must be > 0; powers and noise must be >= 0",
        );
    }

    let mut seen = BTreeSet::new();
    for ch in &s.channels {
        let key = ch.key();
        if !(ch.wavelength_nm > 0.0 && ch.wavelength_nm.is_finite()) {
            r.violation("invalid wavelength", format!("{} nm", ch.wavelength_nm));
            continue;
        }
        if !seen.insert(key.clone()) {
            r.violation("duplicate wavelength", format!("{key} nm appears more than once"));
        }
        let off = itu_grid_offset_hz(ch.wavelength_nm);
        if off.abs() > ITU_TOLERANCE_HZ {
            r.warnings.push(format!(
                "channel {key} nm is {:.1} GHz off the 50 GHz ITU grid",
                off / 1e9
            ));
        }
        if ch.roles.is_empty() {
            r.violation("no roles", format!("channel {key} has no contact or contactless role"));
        }
        if !(ch.fiber_length_km >= 0.0 && ch.fiber_loss_db_per_km >= 0.0) {
            r.violation("invalid fiber", format!("channel {key}: length and loss must be >= 0"));
        }
        if ch.has(Role::Contact) {
            match &ch.fbg {
                None => r.violation("missing fbg", format!("contact channel {key} has no FBG profile")),
                Some(f) => {
                    if let Err(e) = f.validate() {
                        r.violation("invalid fbg", format!("channel {key}: {e}"));
                    }
                }
            }
            match s.contact_subjects.get(&key).or_else(|| {
                s.contact_subjects
                    .iter()
                    .find(|(k, _)| find_channel(s, k).is_some_and(|c| c.key() == key))
                    .map(|(_, v)| v)
            }) {
                None => r.violation("missing subject", format!("contact channel {key} has no subject")),
                Some(subj) => check_rates(&mut r, &format!("channel {key} subject '{}'", subj.id), subj),
            }
        } else if ch.fbg.is_some() {
            r.warnings
                .push(format!("channel {key} has an FBG profile but no contact role"));
        }
        if ch.has(Role::Contactless) {
            match &s.acquisition {
                None => r.violation(
                    "missing radar section",
                    format!("contactless channel {key} needs an acquisition section"),
                ),
                Some(acq) => match ch.if_lfm.validate().and_then(|_| derive_chirp(&ch.if_lfm)) {
                    Err(e) => r.violation("invalid chirp", format!("channel {key}: {e}")),
                    Ok(chirp) => {
                        let acq = AcquisitionParams {
                            duration: s.duration,
                            ..*acq
                        };
                        if let Err(e) = acq.validate(&chirp) {
                            r.violation("invalid acquisition", format!("channel {key}: {e}"));
                        }
                        let r_max = unambiguous_range(&chirp, acq.fast_rate);
                        let targets = lookup(&s.radar_scenes, s, &key);
                        if targets.is_none_or(|t| t.is_empty()) {
                            r.warnings.push(format!("contactless channel {key} has no targets"));
                        }
                        for t in targets.into_iter().flatten() {
                            if !(t.nominal_range > 0.0) {
                                r.violation(
                                    "invalid target",
                                    format!("target '{}' on {key}: range must be > 0", t.label()),
                                );
                            } else if t.nominal_range >= r_max {
                                r.violation(
                                    "target out of range",
                                    format!(
                                        "target '{}' on {key} at {:.3} m is beyond the unambiguous range R_max = {:.3} m",
                                        t.label(),
                                        t.nominal_range,
                                        r_max
                                    ),
                                );
                            }
                            if !(t.reflectivity >= 0.0) {
                                r.violation(
                                    "invalid target",
                                    format!("target '{}' on {key}: reflectivity must be >= 0", t.label()),
                                );
                            }
                            check_rates(&mut r, &format!("target '{}' on {key}", t.label()), &t.subject);
                        }
                    }
                },
            }
        }
    }

    for key in s.contact_subjects.keys() {
        match find_channel(s, key) {
            None => r.violation(
                "unknown channel",
                format!("contact subject for '{key}' names no channel"),
            ),
            Some(ch) if !ch.has(Role::Contact) => r.violation(
                "role mismatch",
                format!("channel {} has a contact subject but no contact role", ch.key()),
            ),
            _ => {}
        }
    }
    for key in s.radar_scenes.keys() {
        match find_channel(s, key) {
            None => r.violation("unknown channel", format!("radar scene for '{key}' names no channel")),
            Some(ch) if !ch.has(Role::Contactless) => r.violation(
                "role mismatch",
                format!("channel {} has radar targets but no contactless role", ch.key()),
            ),
            _ => {}
        }
    }
    r
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, s: &Scenario, key: &str) -> Option<&'a T> {
    map.get(key).or_else(|| {
        map.iter()
            .find(|(k, _)| find_channel(s, k).is_some_and(|c| c.key() == key))
            .map(|(_, v)| v)
    })
}

/// SplitMix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of a channel: splitmix64(global ^ splitmix64(round(wavelength_pm))).
pub fn channel_seed(global_seed: u64, wavelength_nm: f64) -> u64 {
    let pm = (wavelength_nm * 1000.0).round() as u64;
    splitmix64(global_seed ^ splitmix64(pm))
}

const CONTACT_STREAM: u64 = 1;
const RADAR_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ContactRecord {
    /// Ground truth; absent for bundles stored without it.
    pub subject: Option<SubjectVitals>,
    pub grid: TimeGrid,
    /// Chest displacement, mm. Ground truth like `subject`.
    pub motion: Option<Vec<f64>>,
    pub intensity: ContactIntensity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelData {
    pub channel: WdmChannel,
    pub seed: u64,
    pub link_power_scale: f64,
    pub contact: Option<ContactRecord>,
    pub frames: Option<DechirpFrameSet>,
}

impl ChannelData {
    pub fn key(&self) -> String {
        self.channel.key()
    }
}

/// Synthesised data for every channel, ordered by wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub scenario: Scenario,
    pub channels: Vec<ChannelData>,
}

fn run_channel(s: &Scenario, ch: &WdmChannel) -> Result<ChannelData> {
    let key = ch.key();
    let seed = channel_seed(s.seed, ch.wavelength_nm);
    let scale = ch.link_power_scale();
    let contact = if ch.has(Role::Contact) {
        let subject = lookup(&s.contact_subjects, s, &key)
            .ok_or_else(|| Error::invalid("contact_subjects", format!("no subject for {key}")))?
            .clone();
        let fbg = ch
            .fbg
            .as_ref()
            .ok_or_else(|| Error::invalid("fbg", format!("no FBG profile for {key}")))?;
        let grid = make_time_grid(s.duration, s.contact.sample_rate)?;
        let motion = synth_motion(&subject, &grid)?;
        let mut intensity = contact_intensity(
            &motion,
            fbg,
            s.contact.carrier_power,
            s.contact.sideband_power,
            s.contact.noise_rms,
            &grid,
            splitmix64(seed ^ CONTACT_STREAM),
        )?;
        for v in &mut intensity.samples {
            *v *= scale;
        }
        Some(ContactRecord {
            subject: Some(subject),
            grid,
            motion: Some(motion),
            intensity,
        })
    } else {
        None
    };
    let frames = if ch.has(Role::Contactless) {
        let acq = AcquisitionParams {
            duration: s.duration,
            ..s.acquisition
                .ok_or_else(|| Error::invalid("acquisition", "contactless channel needs an acquisition section"))?
        };
        let chirp = derive_chirp(&ch.if_lfm)?;
        let targets = lookup(&s.radar_scenes, s, &key).cloned().unwrap_or_default();
        let mut f = synth_dechirp_frames(&targets, &chirp, &acq, splitmix64(seed ^ RADAR_STREAM))?;
        let amp = scale.sqrt();
        for v in &mut f.samples {
            *v *= amp;
        }
        Some(f)
    } else {
        None
    };
    Ok(ChannelData {
        channel: ch.clone(),
        seed,
        link_power_scale: scale,
        contact,
        frames,
    })
}

/// Synthesises every channel of a valid scenario, in parallel.
pub fn run_scenario(s: &Scenario) -> Result<Bundle> {
    let report = validate_scenario(s);
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::invalid("scenario", list.join("; ")));
    }
    let mut channels = s
        .channels
        .par_iter()
        .map(|ch| run_channel(s, ch).map_err(|e| e.in_channel(ch.key())))
        .collect::<Result<Vec<_>>>()?;
    channels.sort_by(|a, b| a.channel.wavelength_nm.total_cmp(&b.channel.wavelength_nm));
    // The bundle carries the scenario as run: one duration everywhere.
    let mut scenario = s.clone();
    if let Some(a) = scenario.acquisition.as_mut() {
        a.duration = s.duration;
    }
    Ok(Bundle { scenario, channels })
}

/// Rate reports for one channel; failures are kept per subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub channel: String,
    pub reports: Vec<VitalsReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

/// Runs the rate chains on every channel of a bundle.
///
/// `duration` keeps only the start of each record. Contactless targets come
/// from the bundle's truth when present, otherwise from the range profile.
pub fn process_bundle(
    bundle: &Bundle,
    cfg: &ProcessingConfig,
    duration: Option<f64>,
    use_truth: bool,
) -> Result<Vec<ChannelReport>> {
    bundle
        .channels
        .par_iter()
        .map(|ch| process_channel(ch, cfg, duration, use_truth).map_err(|e| e.in_channel(ch.key())))
        .collect()
}

fn process_channel(
    ch: &ChannelData,
    cfg: &ProcessingConfig,
    duration: Option<f64>,
    use_truth: bool,
) -> Result<ChannelReport> {
    let mut out = ChannelReport {
        channel: ch.key(),
        reports: Vec::new(),
        failures: Vec::new(),
    };
    if let Some(c) = &ch.contact {
        let fs = c.intensity.sample_rate;
        let series = match duration {
            Some(d) => {
                let n = (d * fs).round() as usize;
                if n > c.intensity.samples.len() {
                    return Err(Error::RecordTooShort {
                        got_s: c.intensity.samples.len() as f64 / fs,
                        min_s: d,
                    });
                }
                &c.intensity.samples[..n]
            }
            None => &c.intensity.samples[..],
        };
        let truth = c.subject.as_ref().filter(|_| use_truth);
        match contact_rates(series, fs, truth, cfg) {
            Ok(r) => out.reports.push(r),
            Err(e) => {
                let who = c.subject.as_ref().map_or("contact", |s| s.id.as_str());
                out.failures.push(format!("contact '{who}': {e}"))
            }
        }
    }
    if let Some(f) = &ch.frames {
        let cut;
        let frames = match duration {
            Some(d) => {
                cut = f.truncated(d)?;
                &cut
            }
            None => f,
        };
        let truth = if use_truth { frames.truth.as_deref() } else { None };
        let ranges: Vec<f64> = match truth {
            Some(t) if !t.is_empty() => t.iter().map(|t| t.nominal_range).collect(),
            _ => detect_targets(&range_profile(frames)?, cfg),
        };
        if !ranges.is_empty() {
            for (r, range) in contactless_rates(frames, &ranges, truth, cfg)?.into_iter().zip(&ranges) {
                match r {
                    Ok(rep) => out.reports.push(rep),
                    Err(e) => out.failures.push(format!("contactless target at {range:.3} m: {e}")),
                }
            }
        }
    }
    Ok(out)
}

impl Scenario {
    pub fn empty() -> Self {
        Self {
            name: "empty".into(),
            seed: 0,
            duration: 60.0,
            contact: ContactSettings::default(),
            acquisition: None,
            channels: Vec::new(),
            contact_subjects: BTreeMap::new(),
            radar_scenes: BTreeMap::new(),
        }
    }

    /// One channel doing both jobs: contact subject 24 rpm / 73 bpm and a
    /// contactless subject at 0.88 m (15 rpm / 81 bpm).
    pub fn single_channel() -> Self {
        let ch = WdmChannel::new(1549.36, &[Role::Contact, Role::Contactless]).with_fbg(FbgProfile::fbg1());
        let key = ch.key();
        Self {
            name: "single-channel".into(),
            seed: 5,
            acquisition: Some(AcquisitionParams::default()),
            contact_subjects: BTreeMap::from([(key.clone(), SubjectVitals::preset(Preset::SingleChannelContact))]),
            radar_scenes: BTreeMap::from([(
                key,
                vec![RadarTarget::new(
                    SubjectVitals::preset(Preset::SingleChannelRadar),
                    0.88,
                )],
            )]),
            channels: vec![ch],
            ..Self::empty()
        }
    }

    /// 1549.36 nm with a contact subject (A) and two contactless subjects at
    /// 1.00 m (B) and 1.65 m (C).
    pub fn three_volunteers() -> Self {
        let ch1 = WdmChannel::new(1549.36, &[Role::Contact, Role::Contactless]).with_fbg(FbgProfile::fbg1());
        let key = ch1.key();
        Self {
            name: "three-volunteers".into(),
            seed: 6,
            acquisition: Some(AcquisitionParams::default()),
            contact_subjects: BTreeMap::from([(key.clone(), SubjectVitals::preset(Preset::VolunteerA))]),
            radar_scenes: BTreeMap::from([(
                key,
                vec![
                    RadarTarget::new(SubjectVitals::preset(Preset::VolunteerB), 1.0),
                    RadarTarget::new(SubjectVitals::preset(Preset::VolunteerC), 1.65),
                ],
            )]),
            channels: vec![ch1],
            ..Self::empty()
        }
    }

    /// Two contact-only channels, FBG1 on volunteer A and FBG2 on
    /// volunteer B.
    pub fn two_contact() -> Self {
        let ch1 = WdmChannel::new(1549.36, &[Role::Contact]).with_fbg(FbgProfile::fbg1());
        let ch2 = WdmChannel::new(1549.92, &[Role::Contact]).with_fbg(FbgProfile::fbg2());
        Self {
            name: "two-contact".into(),
            seed: 7,
            contact_subjects: BTreeMap::from([
                (ch1.key(), SubjectVitals::preset(Preset::VolunteerA)),
                (ch2.key(), SubjectVitals::preset(Preset::VolunteerB)),
            ]),
            channels: vec![ch1, ch2],
            ..Self::empty()
        }
    }

    /// Both deployments on one fibre: the three-volunteer channel plus a
    /// contact-only 1549.92 nm channel with FBG2 on volunteer B.
    pub fn two_channel() -> Self {
        let mut s = Self::three_volunteers();
        let ch2 = WdmChannel::new(1549.92, &[Role::Contact]).with_fbg(FbgProfile::fbg2());
        s.contact_subjects
            .insert(ch2.key(), SubjectVitals::preset(Preset::VolunteerB));
        s.channels.push(ch2);
        s.name = "two-channel".into();
        s
    }

    /// `n` contact-only channels on the 50 GHz grid, with rates spread
    /// across both bands.
    pub fn contact_grid(n: usize) -> Self {
        let mut s = Self {
            name: format!("contact-grid-{n}"),
            seed: 8,
            ..Self::empty()
        };
        for i in 0..n {
            let f = ITU_ANCHOR_HZ + (i as f64 - n as f64 / 2.0) * ITU_SPACING_HZ;
            let wl = SPEED_OF_LIGHT / f * 1e9;
            let ch = WdmChannel::new(wl, &[Role::Contact]).with_fbg(FbgProfile::fbg1());
            let resp = 10.0 + (i % 7) as f64 * 2.0;
            let heart = 55.0 + (i % 11) as f64 * 4.0;
            let subj = SubjectVitals::new(format!("S{i:02}"), resp, heart).with_seed(100 + i as u64);
            s.contact_subjects.insert(ch.key(), subj);
            s.channels.push(ch);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for s in [
            Scenario::single_channel(),
            Scenario::three_volunteers(),
            Scenario::two_contact(),
            Scenario::two_channel(),
            Scenario::contact_grid(8),
        ] {
            let r = validate_scenario(&s);
            assert!(r.is_valid(), "{}: {:?}", s.name, r.violations);
        }
    }

    #[test]
    fn off_grid_wavelengths_warn() {
        let r = validate_scenario(&Scenario::two_contact());
        assert!(r.is_valid());
        assert!(r.warnings.iter().any(|w| w.contains("1549.92")));
        assert!(r.warnings.iter().any(|w| w.contains("1549.36")));
        let mut s = Scenario::two_contact();
        s.channels[0].wavelength_nm = 1550.12;
        s.contact_subjects = BTreeMap::from([
            ("1550.12".to_string(), SubjectVitals::preset(Preset::VolunteerA)),
            ("1549.92".to_string(), SubjectVitals::preset(Preset::VolunteerB)),
        ]);
        let r = validate_scenario(&s);
        assert!(r.is_valid(), "{:?}", r.violations);
        assert!(!r.warnings.iter().any(|w| w.contains("1550.12")));
    }

    #[test]
    fn duplicate_wavelength() {
        let mut s = Scenario::two_contact();
        s.channels[1].wavelength_nm = 1549.36;
        let r = validate_scenario(&s);
        assert!(r.violations.iter().any(|v| v.code == "duplicate wavelength"));
    }

    #[test]
    fn far_target_cites_max_range() {
        let mut s = Scenario::single_channel();
        s.radar_scenes.values_mut().next().unwrap()[0].nominal_range = 12.0;
        let r = validate_scenario(&s);
        let v = r
            .violations
            .iter()
            .find(|v| v.code == "target out of range")
            .expect("violation");
        assert!(v.message.contains("11.24"), "{}", v.message);
    }

    #[test]
    fn role_asset_mismatches() {
        let mut s = Scenario::two_contact();
        s.channels[0].fbg = None;
        s.radar_scenes.insert("1549.92".into(), vec![]);
        s.contact_subjects
            .insert("1550.00".into(), SubjectVitals::new("x", 12.0, 70.0));
        let codes: Vec<String> = validate_scenario(&s).violations.into_iter().map(|v| v.code).collect();
        assert!(codes.contains(&"missing fbg".to_string()));
        assert!(codes.contains(&"role mismatch".to_string()));
        assert!(codes.contains(&"unknown channel".to_string()));

        let mut s = Scenario::single_channel();
        s.acquisition = None;
        let codes: Vec<String> = validate_scenario(&s).violations.into_iter().map(|v| v.code).collect();
        assert!(codes.contains(&"missing radar section".to_string()));
    }

    #[test]
    fn out_of_band_rate() {
        let mut s = Scenario::two_contact();
        s.contact_subjects.values_mut().next().unwrap().heartbeat_rate = 130.0;
        let r = validate_scenario(&s);
        assert!(r.violations.iter().any(|v| v.code == "out-of-band rate"));
    }

    #[test]
    fn empty_scenario_empty_bundle() {
        let b = run_scenario(&Scenario::empty()).unwrap();
        assert!(b.channels.is_empty());
    }

    #[test]
    fn two_contact_bundle_shape() {
        let mut s = Scenario::two_contact();
        s.duration = 10.0;
        let b = run_scenario(&s).unwrap();
        assert_eq!(b.channels.len(), 2);
        for ch in &b.channels {
            assert!(ch.frames.is_none());
            assert_eq!(ch.contact.as_ref().unwrap().intensity.samples.len(), 500);
        }
    }

    #[test]
    fn channel_seed_depends_on_wavelength_only() {
        assert_eq!(channel_seed(3, 1549.36), channel_seed(3, 1549.36));
        assert_ne!(channel_seed(3, 1549.36), channel_seed(3, 1549.92));
        assert_ne!(channel_seed(3, 1549.36), channel_seed(4, 1549.36));
    }

    #[test]
    fn json_round_trip() {
        let s = Scenario::three_volunteers();
        let text = serde_json::to_string_pretty(&s).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
