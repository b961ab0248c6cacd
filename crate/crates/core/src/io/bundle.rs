//! Dataset bundle directory.
//!
//! ```text
//! <root>/scenario.json              resolved scenario
//! <root>/truth.json                 subjects and targets per channel
//! <root>/manifest.json              run manifest
//! <root>/channel_<nm>/channel.json  seed, link scale, contact metadata
//! <root>/channel_<nm>/contact.csv   t_s,power
//! <root>/channel_<nm>/motion.csv    t_s,x_mm (ground truth)
//! <root>/channel_<nm>/frames.bin    frame container
//! ```

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::csv::{read_columns, series_csv};
use super::frames::{decode_frames, encode_frames};
use super::{read_file, read_json, sha256_hex, write_file, write_json};
use crate::photonic::ContactIntensity;
use crate::physio::{SubjectVitals, TimeGrid};
use crate::radar::RadarTarget;
use crate::scenario::{channel_seed, Bundle, ChannelData, ContactRecord, Role, Scenario};
use crate::{Error, Result};

pub const SCENARIO_FILE: &str = "scenario.json";
pub const TRUTH_FILE: &str = "truth.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Provenance of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the resolved scenario JSON, when a scenario is involved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub files: Vec<ManifestFile>,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, serde_json::Value>) -> Self {
        let t = now();
        Self {
            tool: "vitalchirp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            scenario_sha256: None,
            seed: None,
            started_unix_s: t,
            finished_unix_s: t,
            parameters,
            files: Vec::new(),
        }
    }

    /// Writes `bytes` to `root/rel` and records it.
    pub fn write_tracked(&mut self, root: &Path, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        write_file(&path, bytes)?;
        self.files.push(ManifestFile {
            path: rel.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Stamps the finish time and writes `root/manifest.json`.
    pub fn finish(mut self, root: &Path) -> Result<RunManifest> {
        self.finished_unix_s = now();
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        write_json(&root.join(MANIFEST_FILE), &self)?;
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelTruth {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact_subject: Option<SubjectVitals>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radar_targets: Option<Vec<RadarTarget>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub channels: BTreeMap<String, ChannelTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactMeta {
    pub sample_rate: f64,
    pub count: usize,
    pub offset_range_hz: (f64, f64),
    pub edge_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMeta {
    pub wavelength_nm: f64,
    pub seed: u64,
    pub link_power_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact: Option<ContactMeta>,
}

pub fn channel_dir(key: &str) -> String {
    format!("channel_{key}")
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("serialisable");
    b.push(b'\n');
    b
}

/// Writes a bundle under `root` and returns its manifest. Every file goes
/// below `root`.
pub fn write_bundle(root: &Path, bundle: &Bundle, mut manifest: RunManifest) -> Result<RunManifest> {
    std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let scenario = json_bytes(&bundle.scenario);
    manifest.scenario_sha256 = Some(sha256_hex(&scenario));
    manifest.seed = Some(bundle.scenario.seed);
    manifest.write_tracked(root, SCENARIO_FILE, &scenario)?;

    let mut truth = Truth::default();
    for ch in &bundle.channels {
        let key = ch.key();
        let dir = channel_dir(&key);
        let mut meta = ChannelMeta {
            wavelength_nm: ch.channel.wavelength_nm,
            seed: ch.seed,
            link_power_scale: ch.link_power_scale,
            contact: None,
        };
        let mut t = ChannelTruth::default();
        if let Some(c) = &ch.contact {
            let fs = c.intensity.sample_rate;
            meta.contact = Some(ContactMeta {
                sample_rate: fs,
                count: c.intensity.samples.len(),
                offset_range_hz: c.intensity.offset_range_hz,
                edge_warning: c.intensity.edge_warning,
            });
            manifest.write_tracked(
                root,
                &format!("{dir}/contact.csv"),
                series_csv("power", fs, &c.intensity.samples).as_bytes(),
            )?;
            if let Some(m) = &c.motion {
                manifest.write_tracked(root, &format!("{dir}/motion.csv"), series_csv("x_mm", fs, m).as_bytes())?;
            }
            t.contact_subject = c.subject.clone();
        }
        if let Some(f) = &ch.frames {
            manifest.write_tracked(root, &format!("{dir}/frames.bin"), &encode_frames(f)?)?;
            t.radar_targets = f.truth.clone();
        }
        manifest.write_tracked(root, &format!("{dir}/channel.json"), &json_bytes(&meta))?;
        truth.channels.insert(key, t);
    }
    manifest.write_tracked(root, TRUTH_FILE, &json_bytes(&truth))?;
    manifest.finish(root)
}

/// Loads a bundle. Without `truth.json` the subjects, motion and target
/// truth are left empty.
pub fn read_bundle(root: &Path) -> Result<Bundle> {
    let scenario: Scenario = read_json(&root.join(SCENARIO_FILE))?;
    let truth_path = root.join(TRUTH_FILE);
    let truth: Option<Truth> = if truth_path.exists() {
        Some(read_json(&truth_path)?)
    } else {
        None
    };
    let mut channels = Vec::new();
    for ch in &scenario.channels {
        let key = ch.key();
        let dir: PathBuf = root.join(channel_dir(&key));
        let meta_path = dir.join("channel.json");
        let meta: Option<ChannelMeta> = if meta_path.exists() {
            Some(read_json(&meta_path)?)
        } else {
            None
        };
        let t = truth
            .as_ref()
            .and_then(|t| t.channels.get(&key))
            .cloned()
            .unwrap_or_default();
        let contact = if ch.has(Role::Contact) {
            let path = dir.join("contact.csv");
            let (_, cols) = read_columns(&path)?;
            let samples = cols.get(1).cloned().ok_or_else(|| Error::Format {
                path: path.clone(),
                offset: 0,
                reason: "expected columns t_s,power".into(),
            })?;
            let cm = meta.as_ref().and_then(|m| m.contact.clone());
            let sample_rate = cm.as_ref().map_or(scenario.contact.sample_rate, |c| c.sample_rate);
            let motion = if truth.is_some() && dir.join("motion.csv").exists() {
                read_columns(&dir.join("motion.csv"))?.1.get(1).cloned()
            } else {
                None
            };
            Some(ContactRecord {
                subject: t.contact_subject.clone(),
                grid: TimeGrid {
                    start: 0.0,
                    sample_rate,
                    count: samples.len(),
                },
                motion,
                intensity: ContactIntensity {
                    samples,
                    sample_rate,
                    offset_range_hz: cm.as_ref().map_or((f64::NAN, f64::NAN), |c| c.offset_range_hz),
                    edge_warning: cm.is_some_and(|c| c.edge_warning),
                },
            })
        } else {
            None
        };
        let frames = if ch.has(Role::Contactless) {
            let path = dir.join("frames.bin");
            let mut f = decode_frames(&read_file(&path)?, &path)?;
            f.truth = t.radar_targets.clone();
            Some(f)
        } else {
            None
        };
        channels.push(ChannelData {
            channel: ch.clone(),
            seed: meta
                .as_ref()
                .map_or_else(|| channel_seed(scenario.seed, ch.wavelength_nm), |m| m.seed),
            link_power_scale: meta
                .as_ref()
                .map_or_else(|| ch.link_power_scale(), |m| m.link_power_scale),
            contact,
            frames,
        });
    }
    channels.sort_by(|a, b| a.channel.wavelength_nm.total_cmp(&b.channel.wavelength_nm));
    Ok(Bundle { scenario, channels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::run_scenario;

    fn small() -> Bundle {
        let mut s = Scenario::single_channel();
        s.duration = 1.0;
        run_scenario(&s).unwrap()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let b = small();
        let m = write_bundle(dir.path(), &b, RunManifest::new("simulate", BTreeMap::new())).unwrap();
        assert!(m.files.iter().any(|f| f.path.ends_with("frames.bin")));
        let back = read_bundle(dir.path()).unwrap();
        assert_eq!(back.scenario, b.scenario);
        let (x, y) = (&back.channels[0], &b.channels[0]);
        assert_eq!(x.frames, y.frames);
        let (cx, cy) = (x.contact.as_ref().unwrap(), y.contact.as_ref().unwrap());
        assert_eq!(cx.intensity.samples, cy.intensity.samples);
        assert_eq!(cx.subject, cy.subject);
        assert_eq!(cx.motion, cy.motion);
        assert_eq!(x.seed, y.seed);
    }

    #[test]
    fn manifest_hashes_match_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_bundle(dir.path(), &small(), RunManifest::new("simulate", BTreeMap::new())).unwrap();
        for f in &m.files {
            let bytes = std::fs::read(dir.path().join(&f.path)).unwrap();
            assert_eq!(sha256_hex(&bytes), f.sha256, "{}", f.path);
        }
        let scenario = std::fs::read(dir.path().join(SCENARIO_FILE)).unwrap();
        assert_eq!(m.scenario_sha256.as_deref(), Some(sha256_hex(&scenario).as_str()));
    }

    #[test]
    fn without_truth() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), &small(), RunManifest::new("simulate", BTreeMap::new())).unwrap();
        std::fs::remove_file(dir.path().join(TRUTH_FILE)).unwrap();
        let back = read_bundle(dir.path()).unwrap();
        let ch = &back.channels[0];
        assert!(ch.contact.as_ref().unwrap().subject.is_none());
        assert!(ch.contact.as_ref().unwrap().motion.is_none());
        assert!(ch.frames.as_ref().unwrap().truth.is_none());
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
