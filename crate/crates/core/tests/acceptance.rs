//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its own PASS/FAIL line; the process fails if any criterion does.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use vitalchirp::dsp::{self, design_bandpass, unwrap_phase, wrap_phase, BandpassSpec};
use vitalchirp::io::{self, RunManifest};
use vitalchirp::photonic::{derive_chirp, IfLfmParams};
use vitalchirp::physio::{make_time_grid, synth_motion, Preset, SubjectVitals};
use vitalchirp::pipelines::{
    contact_rates, extract_target_phase, range_profile, resolution_sweep, ProcessingConfig, SweepSource, VitalsReport,
    DEFAULT_SWEEP_DURATIONS,
};
use vitalchirp::radar::{synth_dechirp_frames, AcquisitionParams, DechirpFrameSet, RadarTarget};
use vitalchirp::scenario::{process_bundle, run_scenario, Bundle, ChannelReport, Scenario};
use vitalchirp::SPEED_OF_LIGHT;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn noiseless(mut s: Scenario) -> Scenario {
    s.contact.noise_rms = 0.0;
    if let Some(a) = s.acquisition.as_mut() {
        a.noise_rms = 0.0;
    }
    s
}

fn reports(s: &Scenario) -> Result<Vec<ChannelReport>, String> {
    let b = run_scenario(s).map_err(|e| e.to_string())?;
    process_bundle(&b, &ProcessingConfig::default(), None, true).map_err(|e| e.to_string())
}

fn all_reports(chs: &[ChannelReport]) -> Result<Vec<&VitalsReport>, String> {
    for c in chs {
        if let Some(f) = c.failures.first() {
            return Err(format!("channel {}: {f}", c.channel));
        }
    }
    Ok(chs.iter().flat_map(|c| c.reports.iter()).collect())
}

/// Largest |error| for respiration (rpm) and heartbeat (bpm) among reports
/// picked by `keep`.
fn worst(rs: &[&VitalsReport], keep: impl Fn(&VitalsReport) -> bool) -> Result<(f64, f64, usize), String> {
    let mut w = (0.0f64, 0.0f64, 0);
    for r in rs.iter().filter(|r| keep(r)) {
        let er = r
            .respiration
            .error
            .ok_or_else(|| format!("{}: no respiration estimate", r.label))?;
        let eh = r
            .heartbeat
            .error
            .ok_or_else(|| format!("{}: no heartbeat estimate", r.label))?;
        w = (w.0.max(er.abs()), w.1.max(eh.abs()), w.2 + 1);
    }
    Ok(w)
}

fn chirp_derivation() -> Outcome {
    let started = Instant::now();
    let c = derive_chirp(&IfLfmParams::default()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    // Quadrupling the ±2nd-order sidebands: start 4 f_C - 2 f_B, sweep 4 f_B.
    let start = 4.0 * 6.6e9 - 2.0 * 1.0e9;
    let sweep = 4.0 * 1.0e9;
    let lambda_mm = SPEED_OF_LIGHT / start * 1e3;
    check((c.start_freq - start).abs() < 1e-3, || {
        format!("start {}", c.start_freq)
    })?;
    check((c.sweep_bandwidth - sweep).abs() < 1e-3, || {
        format!("sweep {}", c.sweep_bandwidth)
    })?;
    check((c.center_freq() - 26.4e9).abs() < 1e-3, || {
        format!("centre {}", c.center_freq())
    })?;
    check((c.chirp_rate / (sweep / 60e-6) - 1.0).abs() < 1e-12, || {
        format!("chirp rate {}", c.chirp_rate)
    })?;
    let lc = c.carrier_wavelength * 1e3;
    check((lc - 12.29).abs() <= 0.01 && (lc - lambda_mm).abs() < 1e-12, || {
        format!("lambda_c {lc} mm")
    })?;
    check(elapsed < Duration::from_millis(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "start {:.1} GHz, centre {:.1} GHz, sweep {:.1} GHz, lambda_c {lc:.3} mm",
        c.start_freq / 1e9,
        c.center_freq() / 1e9,
        c.sweep_bandwidth / 1e9
    ))
}

fn range_accuracy() -> Outcome {
    let started = Instant::now();
    let b = run_scenario(&Scenario::three_volunteers()).map_err(|e| e.to_string())?;
    let frames = b.channels[0].frames.as_ref().ok_or("no frames")?;
    let p = range_profile(frames).map_err(|e| e.to_string())?;
    let peaks = p.peaks(ProcessingConfig::default().detection_threshold);
    let elapsed = started.elapsed();
    let bin = 0.0375;
    let mut found = Vec::new();
    for truth in [1.00, 1.65] {
        let best = peaks
            .iter()
            .map(|&k| p.refined_range(k))
            .min_by(|a, b| (a - truth).abs().total_cmp(&(b - truth).abs()))
            .ok_or("no peaks")?;
        check((best - truth).abs() <= bin, || {
            format!("truth {truth} m, nearest peak {best:.4} m")
        })?;
        found.push(best);
    }
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "peaks {:.3} m and {:.3} m for 1.00/1.65 m, {:.2} s for a 60 s scene",
        found[0],
        found[1],
        elapsed.as_secs_f64()
    ))
}

fn contactless_recovery() -> Outcome {
    let is_radar = |r: &VitalsReport| r.range_estimate_m.is_some();
    let noisy = reports(&Scenario::three_volunteers())?;
    let (r, h, n) = worst(&all_reports(&noisy)?, is_radar)?;
    check(n == 2, || format!("{n} contactless reports"))?;
    check(r <= 0.6 && h <= 1.2, || {
        format!("default noise: {r:.3} rpm / {h:.3} bpm")
    })?;
    let clean = reports(&noiseless(Scenario::three_volunteers()))?;
    let (r0, h0, _) = worst(&all_reports(&clean)?, is_radar)?;
    check(r0 <= 0.2 && h0 <= 0.2, || {
        format!("noise off: {r0:.3} rpm / {h0:.3} bpm")
    })?;
    Ok(format!(
        "worst {r:.3} rpm / {h:.3} bpm, noise off {r0:.3} rpm / {h0:.3} bpm"
    ))
}

fn contact_recovery() -> Outcome {
    let is_contact = |r: &VitalsReport| r.range_estimate_m.is_none();
    let noisy = reports(&Scenario::three_volunteers())?;
    let (r, h, n) = worst(&all_reports(&noisy)?, is_contact)?;
    check(n == 1, || format!("{n} contact reports"))?;
    check(r <= 1.6 && h <= 0.5, || {
        format!("default noise: {r:.3} rpm / {h:.3} bpm")
    })?;
    let clean = reports(&noiseless(Scenario::three_volunteers()))?;
    let (r0, h0, _) = worst(&all_reports(&clean)?, is_contact)?;
    check(r0 <= 0.2 && h0 <= 0.2, || {
        format!("noise off: {r0:.3} rpm / {h0:.3} bpm")
    })?;
    Ok(format!(
        "error {r:.3} rpm / {h:.3} bpm, noise off {r0:.3} rpm / {h0:.3} bpm"
    ))
}

fn clean_frames(targets: &[RadarTarget], duration: f64) -> Result<DechirpFrameSet, String> {
    let acq = AcquisitionParams {
        duration,
        noise_rms: 0.0,
        ..AcquisitionParams::default()
    };
    let chirp = derive_chirp(&IfLfmParams::default()).map_err(|e| e.to_string())?;
    synth_dechirp_frames(targets, &chirp, &acq, 0).map_err(|e| e.to_string())
}

fn phase_inversion() -> Outcome {
    let lambda_m = SPEED_OF_LIGHT / 24.4e9;
    let k_per_mm = 4.0 * PI / (lambda_m * 1e3);

    let subject = SubjectVitals::preset(Preset::VolunteerB);
    let frames = clean_frames(&[RadarTarget::new(subject.clone(), 1.0)], 30.0)?;
    let tp = extract_target_phase(&frames, 1.0, false).map_err(|e| e.to_string())?;
    let x = synth_motion(
        &subject,
        &make_time_grid(30.0, tp.slow_rate).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let mut est: Vec<f64> = tp.phase.iter().map(|p| p / k_per_mm).collect();
    let mut want = x.clone();
    dsp::remove_mean(&mut est);
    dsp::remove_mean(&mut want);
    let rms = (est.iter().zip(&want).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / est.len() as f64).sqrt();
    let peak = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    check(rms < 0.02 * peak, || format!("rms {rms:.5} mm vs peak {peak:.3} mm"))?;

    // A still reflector moved by 1 mm between two acquisitions.
    let still = SubjectVitals {
        resp_amplitude: 0.0,
        heart_amplitude: 0.0,
        ..SubjectVitals::new("still", 12.0, 60.0)
    };
    let mean_phase = |r0: f64| -> Result<f64, String> {
        let f = clean_frames(&[RadarTarget::new(still.clone(), r0)], 5.0)?;
        let tp = extract_target_phase(&f, 1.0, false).map_err(|e| e.to_string())?;
        Ok(tp.phase.iter().sum::<f64>() / tp.phase.len() as f64)
    };
    let step = wrap_phase(mean_phase(1.001)? - mean_phase(1.0)?);
    check((step - 1.023).abs() <= 0.001, || {
        format!("1 mm step gave {step:.5} rad")
    })?;
    Ok(format!(
        "rms {:.4}% of peak, 1 mm step {step:.4} rad (oracle {:.4})",
        100.0 * rms / peak,
        k_per_mm
    ))
}

fn resolution_behaviour() -> Outcome {
    let started = Instant::now();
    let cfg = ProcessingConfig::default();
    let b = run_scenario(&Scenario::three_volunteers()).map_err(|e| e.to_string())?;
    let ch = &b.channels[0];
    let contact = ch.contact.as_ref().ok_or("no contact record")?;
    let frames = ch.frames.as_ref().ok_or("no frames")?;
    let mut rows = resolution_sweep(
        SweepSource::Contact {
            series: &contact.intensity.samples,
            sample_rate: contact.intensity.sample_rate,
            truth: contact.subject.as_ref(),
        },
        &DEFAULT_SWEEP_DURATIONS,
        &cfg,
    )
    .map_err(|e| e.to_string())?
    .rows;
    rows.extend(
        resolution_sweep(
            SweepSource::Contactless {
                frames,
                ranges: &[1.0, 1.65],
            },
            &DEFAULT_SWEEP_DURATIONS,
            &cfg,
        )
        .map_err(|e| e.to_string())?
        .rows,
    );
    let elapsed = started.elapsed();

    let mut by_label: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for r in &rows {
        check(r.flag.is_none(), || {
            format!("{} at {} s flagged: {:?}", r.label, r.duration_s, r.flag)
        })?;
        by_label.entry(r.label.clone()).or_default().push(r);
    }
    check(by_label.len() == 3, || {
        format!("labels {:?}", by_label.keys().collect::<Vec<_>>())
    })?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (label, rs) in &by_label {
        check(rs.len() == DEFAULT_SWEEP_DURATIONS.len(), || {
            format!("{label}: {} rows", rs.len())
        })?;
        for pick in [0, 1] {
            let width = |r: &vitalchirp::pipelines::SweepRow| if pick == 0 { r.resp_3db_hz } else { r.heart_3db_hz };
            let rate = |r: &vitalchirp::pipelines::SweepRow| if pick == 0 { r.resp_rate } else { r.heart_rate };
            let mut prev = f64::INFINITY;
            for r in rs {
                let w = width(r).ok_or_else(|| format!("{label} at {} s: no width", r.duration_s))?;
                let ratio = w / (0.886 / r.duration_s);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                check((0.8..=1.2).contains(&ratio), || {
                    format!("{label} at {} s: width ratio {ratio:.3}", r.duration_s)
                })?;
                check(w <= prev * 1.05, || {
                    format!("{label}: width grows to {w} at {} s", r.duration_s)
                })?;
                prev = w;
            }
            let r5 = rate(rs[0]).ok_or("no 5 s rate")?;
            let r60 = rate(rs[rs.len() - 1]).ok_or("no 60 s rate")?;
            // One bin of a 5 s record, per minute.
            check((r5 - r60).abs() <= 60.0 / 5.0, || {
                format!("{label}: 5 s {r5:.2} vs 60 s {r60:.2}")
            })?;
        }
    }
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "width / (0.886/T) in [{lo:.3}, {hi:.3}], {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn filter_conformance() -> Outcome {
    let mut parts = Vec::new();
    for (lo, hi) in [(0.13, 0.5), (0.8, 1.9)] {
        let spec = BandpassSpec::new(lo, hi, 50.0);
        let f = design_bandpass(&spec).map_err(|e| e.to_string())?;
        let c = f.conformance(8192);
        check(c.meets(&spec) && f.is_stable(), || format!("{lo}-{hi} Hz: {c:?}"))?;
        parts.push(format!(
            "{lo}-{hi} Hz ripple {:.4} dB, stop {:.2} dB, |p| {:.4}",
            c.passband_max_db - c.passband_min_db,
            -c.stopband_max_db,
            c.max_pole_radius
        ));
    }
    Ok(parts.join("; "))
}

fn bundle_files(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn properties() -> Outcome {
    // Unwrap idempotence and wrap consistency.
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let series = prop::collection::vec(-0.99 * PI..0.99 * PI, 2..200).prop_map(|steps| {
        steps
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect::<Vec<f64>>()
    });
    runner
        .run(&series, |x| {
            let wrapped: Vec<f64> = x.iter().map(|&v| wrap_phase(v)).collect();
            let u = unwrap_phase(&wrapped);
            prop_assert_eq!(unwrap_phase(&u), u.clone());
            for ((a, b), orig) in u.iter().zip(&wrapped).zip(&x) {
                prop_assert!((wrap_phase(a - b)).abs() < 1e-9);
                prop_assert!((a - (orig - x[0] + wrapped[0])).abs() < 1e-8);
            }
            Ok(())
        })
        .map_err(|e| format!("unwrap: {e}"))?;

    // Scale invariance of the contact chain.
    let b = run_scenario(&Scenario::single_channel()).map_err(|e| e.to_string())?;
    let c = b.channels[0].contact.as_ref().ok_or("no contact record")?;
    let cfg = ProcessingConfig::default();
    let base = contact_rates(&c.intensity.samples, 50.0, None, &cfg).map_err(|e| e.to_string())?;
    for gain in [1e-3, 0.37, 250.0] {
        let scaled: Vec<f64> = c.intensity.samples.iter().map(|v| v * gain).collect();
        let r = contact_rates(&scaled, 50.0, None, &cfg).map_err(|e| e.to_string())?;
        for (a, b) in [
            (base.respiration.rate, r.respiration.rate),
            (base.heartbeat.rate, r.heartbeat.rate),
        ] {
            let (a, b) = (a.ok_or("no rate")?, b.ok_or("no rate")?);
            check((a - b).abs() < 1e-9, || format!("gain {gain}: {a} vs {b}"))?;
        }
    }

    // Channel isolation: adding channels leaves existing ones bit-identical.
    let mut one = Scenario::three_volunteers();
    one.duration = 10.0;
    let mut two = Scenario::two_channel();
    two.duration = 10.0;
    let b1 = run_scenario(&one).map_err(|e| e.to_string())?;
    let b2 = run_scenario(&two).map_err(|e| e.to_string())?;
    let key = b1.channels[0].key();
    let same = b2.channels.iter().find(|c| c.key() == key).ok_or("channel missing")?;
    check(
        same.contact == b1.channels[0].contact && same.frames == b1.channels[0].frames,
        || format!("channel {key} changed when a channel was added"),
    )?;
    let r1 = process_bundle(&b1, &cfg, None, true).map_err(|e| e.to_string())?;
    let r2 = process_bundle(&b2, &cfg, None, true).map_err(|e| e.to_string())?;
    let r2_same = r2.iter().find(|r| r.channel == key).ok_or("report missing")?;
    check(&r1[0] == r2_same, || "per-channel report changed".into())?;

    // Determinism: byte-identical bundles for a fixed seed.
    let write = |b: &Bundle| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let d = tempfile::tempdir().map_err(|e| e.to_string())?;
        io::write_bundle(d.path(), b, RunManifest::new("acceptance", BTreeMap::new())).map_err(|e| e.to_string())?;
        Ok(bundle_files(d.path()))
    };
    let again = run_scenario(&two).map_err(|e| e.to_string())?;
    let (wa, wb) = (write(&b2)?, write(&again)?);
    check(!wa.is_empty() && wa == wb, || "bundles differ".into())?;
    let files = wa.len();

    // Superposition of noise-free frames.
    let ta = RadarTarget::new(SubjectVitals::preset(Preset::VolunteerB), 1.0);
    let tb = RadarTarget::new(SubjectVitals::preset(Preset::VolunteerC), 1.65);
    let fa = clean_frames(std::slice::from_ref(&ta), 2.0)?;
    let fb = clean_frames(std::slice::from_ref(&tb), 2.0)?;
    let fab = clean_frames(&[ta, tb], 2.0)?;
    let scale = fab.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = fab
        .samples
        .iter()
        .zip(fa.samples.iter().zip(&fb.samples))
        .fold(0.0f64, |m, (ab, (a, b))| m.max((ab - a - b).abs()));
    check(dev <= 1e-12 * scale, || format!("superposition residual {dev:e}"))?;

    Ok(format!(
        "1000 unwrap cases, scale invariance, isolation, {files} identical files, superposition residual {dev:.1e}"
    ))
}

fn timed_grid(n: usize) -> Result<(Duration, usize, usize), String> {
    let s = Scenario::contact_grid(n);
    let started = Instant::now();
    let chs = reports(&s)?;
    let elapsed = started.elapsed();
    let rs = all_reports(&chs)?;
    let good = rs
        .iter()
        .filter(|r| {
            r.respiration.detected
                && r.heartbeat.detected
                && r.respiration.error.is_some_and(|e| e.abs() <= 1.6)
                && r.heartbeat.error.is_some_and(|e| e.abs() <= 0.5)
        })
        .count();
    Ok((elapsed, rs.len(), good))
}

fn multi_channel_scaling() -> Outcome {
    // Full-width run: every channel must yield a valid report.
    let (t_par, total, good) = timed_grid(16)?;
    check(total == 16 && good == 16, || format!("{good} of {total} reports valid"))?;

    // Growth is measured on one thread so the thread pool's fill level does
    // not masquerade as per-channel cost.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let best = |n| -> Result<Duration, String> {
        pool.install(|| {
            let mut t = Duration::MAX;
            for _ in 0..3 {
                t = t.min(timed_grid(n)?.0);
            }
            Ok(t)
        })
    };
    best(2)?;
    let t4 = best(4)?;
    let t16 = best(16)?;
    let ratio = t16.as_secs_f64() / t4.as_secs_f64();
    // Four times the channels, linear within 20%.
    check(ratio <= 4.8, || format!("16/4 channel runtime ratio {ratio:.2}"))?;
    Ok(format!(
        "16 valid reports in {:.3} s, single-thread 16/4 runtime ratio {ratio:.2}",
        t_par.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("chirp derivation", chirp_derivation),
        ("range accuracy", range_accuracy),
        ("contactless rate recovery", contactless_recovery),
        ("contact rate recovery", contact_recovery),
        ("phase-motion inversion", phase_inversion),
        ("resolution sweep", resolution_behaviour),
        ("filter conformance", filter_conformance),
        ("property suites", properties),
        ("multi-channel scaling", multi_channel_scaling),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
