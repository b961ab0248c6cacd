use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use vitalchirp::dsp::{design_bandpass, BandpassSpec};
use vitalchirp::io::bundle::{channel_dir, RunManifest};
use vitalchirp::io::csv;
use vitalchirp::io::{read_bundle, write_bundle};
use vitalchirp::pipelines::{
    contact_rates_with_traces, contactless_rates_with_traces, detect_targets, range_profile, resolution_sweep,
    ProcessingConfig, SweepSource, VitalTraces,
};
use vitalchirp::scenario::{process_bundle, run_scenario, validate_scenario, Scenario};
use vitalchirp::Error;

use clap::ValueEnum;

use crate::{Format, OutArgs, PresetName, OUT_ENV};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_PROCESSING: u8 = 4;

pub struct CliError {
    pub code: u8,
    pub lines: Vec<String>,
}

impl CliError {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self {
            code,
            lines: vec![msg.into()],
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Channel { source, .. } => exit_code(source),
        Error::InvalidParameter { .. } | Error::Design(_) | Error::TargetOutOfRange { .. } | Error::Unsupported(_) => {
            EXIT_VALIDATION
        }
        Error::Io { .. } | Error::Format { .. } | Error::Json { .. } => EXIT_IO,
        _ => EXIT_PROCESSING,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::new(exit_code(&e), format!("error: {e}"))
    }
}

type CliResult = Result<(), CliError>;

fn out_dir(args: &OutArgs, command: &str) -> PathBuf {
    if let Some(p) = &args.out {
        return p.clone();
    }
    match std::env::var_os(OUT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(command),
        _ => PathBuf::from("vitalchirp-out").join(command),
    }
}

fn processing_config(dc_comp: bool) -> ProcessingConfig {
    ProcessingConfig {
        dc_compensation: dc_comp,
        ..ProcessingConfig::default()
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_IO, format!("error: cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::new(EXIT_VALIDATION, format!("error: {}: {e}", path.display())))
}

pub fn simulate(
    config: Option<PathBuf>,
    preset: Option<PresetName>,
    seed: Option<u64>,
    duration: Option<f64>,
    noiseless: bool,
    out: &OutArgs,
) -> CliResult {
    let mut scenario = match (&config, preset) {
        (Some(p), _) => load_scenario(p)?,
        (None, Some(PresetName::SingleChannel)) => Scenario::single_channel(),
        (None, Some(PresetName::ThreeVolunteers)) => Scenario::three_volunteers(),
        (None, Some(PresetName::TwoContact)) => Scenario::two_contact(),
        (None, Some(PresetName::TwoChannel)) => Scenario::two_channel(),
        (None, None) => {
            return Err(CliError::new(
                EXIT_VALIDATION,
                "error: --config or --preset is required",
            ))
        }
    };
    if let Some(s) = seed {
        scenario.seed = s;
    }
    if let Some(d) = duration {
        scenario.duration = d;
    }
    if noiseless {
        scenario.contact.noise_rms = 0.0;
        if let Some(a) = scenario.acquisition.as_mut() {
            a.noise_rms = 0.0;
        }
    }
    let report = validate_scenario(&scenario);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !report.is_valid() {
        return Err(CliError {
            code: EXIT_VALIDATION,
            lines: report.violations.iter().map(|v| v.to_string()).collect(),
        });
    }
    let bundle = run_scenario(&scenario)?;
    let dir = out_dir(out, "simulate");
    let mut params = BTreeMap::new();
    params.insert("config".into(), json!(config.map(|p| p.display().to_string())));
    params.insert(
        "preset".into(),
        json!(preset
            .and_then(|p| p.to_possible_value())
            .map(|v| v.get_name().to_string())),
    );
    params.insert("seed".into(), json!(seed));
    params.insert("duration".into(), json!(duration));
    params.insert("noiseless".into(), json!(noiseless));
    let manifest = write_bundle(&dir, &bundle, RunManifest::new("simulate", params))?;
    for ch in &bundle.channels {
        let mut parts = Vec::new();
        if let Some(c) = &ch.contact {
            parts.push(format!("contact {} samples", c.intensity.samples.len()));
            if c.intensity.edge_warning {
                eprintln!(
                    "warning: channel {}: carrier leaves the quasi-linear notch edge",
                    ch.key()
                );
            }
        }
        if let Some(f) = &ch.frames {
            parts.push(format!("frames {} x {}", f.slow_count, f.fast_count));
        }
        println!("channel {}: {}", ch.key(), parts.join(", "));
    }
    println!("wrote {} files to {}", manifest.files.len() + 1, dir.display());
    Ok(())
}

fn trace_files(manifest: &mut RunManifest, dir: &Path, stem: &str, t: &VitalTraces) -> Result<(), Error> {
    let fs = t.sample_rate;
    manifest.write_tracked(
        dir,
        &format!("{stem}_input.csv"),
        csv::series_csv("value", fs, &t.input).as_bytes(),
    )?;
    manifest.write_tracked(
        dir,
        &format!("{stem}_respiration.csv"),
        csv::series_csv("value", fs, &t.respiration).as_bytes(),
    )?;
    manifest.write_tracked(
        dir,
        &format!("{stem}_heartbeat.csv"),
        csv::series_csv("value", fs, &t.heartbeat).as_bytes(),
    )?;
    manifest.write_tracked(
        dir,
        &format!("{stem}_resp_spectrum.csv"),
        csv::spectrum_csv(&t.resp_spectrum).as_bytes(),
    )?;
    manifest.write_tracked(
        dir,
        &format!("{stem}_heart_spectrum.csv"),
        csv::spectrum_csv(&t.heart_spectrum).as_bytes(),
    )?;
    Ok(())
}

fn safe(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn process(bundle_dir: &Path, duration: Option<f64>, dc_comp: bool, no_truth: bool, out: &OutArgs) -> CliResult {
    let bundle = read_bundle(bundle_dir)?;
    let cfg = processing_config(dc_comp);
    let reports = process_bundle(&bundle, &cfg, duration, !no_truth)?;
    let dir = out_dir(out, "process");
    let mut params = BTreeMap::new();
    params.insert("bundle".into(), json!(bundle_dir.display().to_string()));
    params.insert("duration".into(), json!(duration));
    params.insert("dc_comp".into(), json!(dc_comp));
    params.insert("no_truth".into(), json!(no_truth));
    params.insert("format".into(), json!(format!("{:?}", out.format).to_lowercase()));
    let mut manifest = RunManifest::new("process", params);
    manifest.seed = Some(bundle.scenario.seed);

    let mut body = serde_json::to_vec_pretty(&reports).expect("serialisable");
    body.push(b'\n');
    manifest.write_tracked(&dir, "reports.json", &body)?;
    let rows: Vec<(String, &vitalchirp::pipelines::VitalsReport)> = reports
        .iter()
        .flat_map(|c| c.reports.iter().map(move |r| (c.channel.clone(), r)))
        .collect();
    manifest.write_tracked(&dir, "table.csv", csv::report_table_csv(&rows).as_bytes())?;

    if out.format == Format::Csv {
        for ch in &bundle.channels {
            let cd = channel_dir(&ch.key());
            if let Some(c) = &ch.contact {
                let fs = c.intensity.sample_rate;
                let n = duration.map_or(c.intensity.samples.len(), |d| {
                    ((d * fs).round() as usize).min(c.intensity.samples.len())
                });
                let truth = c.subject.as_ref().filter(|_| !no_truth);
                if let Ok((r, t)) = contact_rates_with_traces(&c.intensity.samples[..n], fs, truth, &cfg) {
                    trace_files(&mut manifest, &dir, &format!("{cd}/contact_{}", safe(&r.label)), &t)?;
                }
                if let Some(fbg) = &ch.channel.fbg {
                    let offsets: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.05e9).collect();
                    manifest.write_tracked(
                        &dir,
                        &format!("{cd}/fbg_transmission.csv"),
                        csv::fbg_transmission_csv(fbg, &offsets)?.as_bytes(),
                    )?;
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
                let profile = range_profile(frames)?;
                manifest.write_tracked(
                    &dir,
                    &format!("{cd}/range_profile.csv"),
                    csv::range_profile_csv(&profile).as_bytes(),
                )?;
                let truth = frames.truth.as_deref().filter(|_| !no_truth);
                let ranges: Vec<f64> = match truth {
                    Some(t) if !t.is_empty() => t.iter().map(|t| t.nominal_range).collect(),
                    _ => detect_targets(&profile, &cfg),
                };
                if ranges.is_empty() {
                    continue;
                }
                for (r, t, p) in contactless_rates_with_traces(frames, &ranges, truth, &cfg)?
                    .into_iter()
                    .flatten()
                {
                    let stem = format!("{cd}/contactless_{}", safe(&r.label));
                    trace_files(&mut manifest, &dir, &stem, &t)?;
                    manifest.write_tracked(
                        &dir,
                        &format!("{stem}_phase.csv"),
                        csv::series_csv("phase_rad", p.slow_rate, &p.phase).as_bytes(),
                    )?;
                }
            }
        }
    }
    manifest.finish(&dir)?;

    println!("channel,label,modality,respiration_rpm,heartbeat_bpm,resp_error,heart_error,range_m");
    let mut failures = Vec::new();
    for c in &reports {
        for r in &c.reports {
            let show = |v: &Option<String>| v.clone().unwrap_or_else(|| "-".into());
            println!(
                "{},{},{},{},{},{},{},{}",
                c.channel,
                r.label,
                r.modality,
                show(&r.respiration.rate_display),
                show(&r.heartbeat.rate_display),
                show(&r.respiration.error_display),
                show(&r.heartbeat.error_display),
                r.range_estimate_m.map_or("-".into(), |v| format!("{v:.3}"))
            );
        }
        failures.extend(c.failures.iter().map(|f| format!("error: channel {}: {f}", c.channel)));
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_PROCESSING,
            lines: failures,
        })
    }
}

pub fn sweep(bundle_dir: &Path, durations: &[f64], dc_comp: bool, out: &OutArgs) -> CliResult {
    if durations.is_empty() {
        return Err(CliError::new(EXIT_VALIDATION, "error: --durations is empty"));
    }
    let bundle = read_bundle(bundle_dir)?;
    let cfg = processing_config(dc_comp);
    let mut rows = Vec::new();
    let mut truncation = String::from("start-anchored");
    for ch in &bundle.channels {
        if let Some(c) = &ch.contact {
            let src = SweepSource::Contact {
                series: &c.intensity.samples,
                sample_rate: c.intensity.sample_rate,
                truth: c.subject.as_ref(),
            };
            let rep = resolution_sweep(src, durations, &cfg)?;
            truncation = rep.truncation;
            rows.extend(rep.rows.into_iter().map(|r| (ch.key(), r)));
        }
        if let Some(f) = &ch.frames {
            let ranges: Vec<f64> = match f.truth.as_deref() {
                Some(t) if !t.is_empty() => t.iter().map(|t| t.nominal_range).collect(),
                _ => detect_targets(&range_profile(f)?, &cfg),
            };
            if ranges.is_empty() {
                continue;
            }
            let rep = resolution_sweep(
                SweepSource::Contactless {
                    frames: f,
                    ranges: &ranges,
                },
                durations,
                &cfg,
            )?;
            rows.extend(rep.rows.into_iter().map(|r| (ch.key(), r)));
        }
    }
    let dir = out_dir(out, "sweep");
    let mut params = BTreeMap::new();
    params.insert("bundle".into(), json!(bundle_dir.display().to_string()));
    params.insert("durations".into(), json!(durations));
    params.insert("dc_comp".into(), json!(dc_comp));
    let mut manifest = RunManifest::new("sweep", params);
    manifest.seed = Some(bundle.scenario.seed);
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|(ch, r)| {
            let mut v = serde_json::to_value(r).expect("serialisable");
            v["channel"] = json!(ch);
            v
        })
        .collect();
    let mut body =
        serde_json::to_vec_pretty(&json!({ "truncation": truncation, "rows": json_rows })).expect("serialisable");
    body.push(b'\n');
    manifest.write_tracked(&dir, "sweep.json", &body)?;
    let table = vitalchirp::pipelines::SweepReport {
        truncation,
        rows: rows.iter().map(|(_, r)| r.clone()).collect(),
    };
    let text = csv::sweep_csv(&table);
    manifest.write_tracked(&dir, "sweep.csv", text.as_bytes())?;
    manifest.finish(&dir)?;
    if out.format == Format::Csv {
        print!("{text}");
    } else {
        println!("{}", String::from_utf8_lossy(&body).trim_end());
    }
    let flagged: Vec<String> = table
        .rows
        .iter()
        .filter_map(|r| {
            r.flag
                .as_ref()
                .map(|f| format!("warning: {} at {} s: {f}", r.label, r.duration_s))
        })
        .collect();
    for f in &flagged {
        eprintln!("{f}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn filter_design(
    low: f64,
    high: f64,
    sample_rate: f64,
    order: usize,
    ripple: f64,
    atten: f64,
    points: usize,
    out: &OutArgs,
) -> CliResult {
    let spec = BandpassSpec {
        low_edge: low,
        high_edge: high,
        sample_rate,
        passband_ripple: ripple,
        stopband_atten: atten,
        order,
    };
    let coeffs = design_bandpass(&spec)?;
    let conf = coeffs.conformance(points.max(4096));
    let dir = out_dir(out, "filter-design");
    let mut params = BTreeMap::new();
    params.insert("spec".into(), serde_json::to_value(spec).expect("serialisable"));
    params.insert("points".into(), json!(points));
    let mut manifest = RunManifest::new("filter-design", params);
    let sections = csv::sections_csv(&coeffs);
    manifest.write_tracked(&dir, "sections.csv", sections.as_bytes())?;
    manifest.write_tracked(
        &dir,
        "response.csv",
        csv::filter_response_csv(&coeffs, points).as_bytes(),
    )?;
    let summary = json!({
        "spec": spec,
        "sections": coeffs.sections,
        "gain": coeffs.gain,
        "stopband_edges_hz": coeffs.stopband_edges,
        "conformance": conf,
        "conforms": conf.meets(&spec),
    });
    let mut body = serde_json::to_vec_pretty(&summary).expect("serialisable");
    body.push(b'\n');
    manifest.write_tracked(&dir, "filter.json", &body)?;
    manifest.finish(&dir)?;
    match out.format {
        Format::Csv => print!("{sections}"),
        Format::Json => println!("{}", String::from_utf8_lossy(&body).trim_end()),
    }
    if !conf.meets(&spec) {
        return Err(CliError::new(
            EXIT_PROCESSING,
            format!("error: realised response misses the spec: {conf:?}"),
        ));
    }
    Ok(())
}
