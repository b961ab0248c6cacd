//! Plain comma-separated tables with one header line.
//!
//! Numbers use Rust's shortest round-trip formatting, so reading a file
//! back yields bit-identical values.

use std::fmt::Write as _;
use std::path::Path;

use super::{read_file, write_file};
use crate::dsp::{FilterCoeffs, MagnitudeSpectrum};
use crate::photonic::{fbg_transmission_db, FbgProfile};
use crate::pipelines::{RangeProfile, SweepReport, VitalEstimate, VitalsReport};
use crate::radar::DechirpFrameSet;
use crate::{Error, Result};

/// Columns of equal length under `headers`.
pub fn columns(headers: &[&str], cols: &[&[f64]]) -> String {
    assert_eq!(headers.len(), cols.len());
    let n = cols.first().map_or(0, |c| c.len());
    assert!(cols.iter().all(|c| c.len() == n), "columns differ in length");
    let mut out = headers.join(",");
    out.push('\n');
    for i in 0..n {
        for (j, c) in cols.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", c[i]);
        }
        out.push('\n');
    }
    out
}

pub fn write_columns(path: &Path, headers: &[&str], cols: &[&[f64]]) -> Result<()> {
    write_file(path, columns(headers, cols).as_bytes())
}

/// Parses a numeric table. Errors carry the byte offset of the bad line.
pub fn parse_columns(text: &str, path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let bad = |offset: usize, reason: String| Error::Format {
        path: path.into(),
        offset: offset as u64,
        reason,
    };
    let mut lines = text.split_inclusive('\n');
    let header_line = lines.next().ok_or_else(|| bad(0, "empty file".into()))?;
    let headers: Vec<String> = header_line
        .trim_end()
        .split(',')
        .map(|h| h.trim().to_string())
        .collect();
    let mut cols = vec![Vec::new(); headers.len()];
    let mut offset = header_line.len();
    for line in lines {
        let body = line.trim_end();
        if !body.is_empty() {
            let fields: Vec<&str> = body.split(',').collect();
            if fields.len() != headers.len() {
                return Err(bad(
                    offset,
                    format!("{} fields, expected {}", fields.len(), headers.len()),
                ));
            }
            for (c, f) in cols.iter_mut().zip(fields) {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| bad(offset, format!("not a number: '{f}'")))?;
                c.push(v);
            }
        }
        offset += line.len();
    }
    Ok((headers, cols))
}

pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Format {
        path: path.into(),
        offset: e.valid_up_to() as u64,
        reason: "not UTF-8".into(),
    })?;
    parse_columns(text, path)
}

pub fn spectrum_csv(s: &MagnitudeSpectrum) -> String {
    columns(&["freq_hz", "magnitude"], &[&s.frequencies, &s.magnitudes])
}

pub fn range_profile_csv(p: &RangeProfile) -> String {
    columns(&["range_m", "magnitude"], &[&p.ranges, &p.magnitudes])
}

/// Time series sampled at `sample_rate` from t = 0.
pub fn series_csv(value_header: &str, sample_rate: f64, values: &[f64]) -> String {
    let t: Vec<f64> = (0..values.len()).map(|i| i as f64 / sample_rate).collect();
    columns(&["t_s", value_header], &[&t, values])
}

/// Frames as a matrix: one line per slow-time row. Meant for small sets.
pub fn frames_csv(f: &DechirpFrameSet) -> String {
    let mut out = String::from("row");
    for n in 0..f.fast_count {
        let _ = write!(out, ",s{n}");
    }
    out.push('\n');
    for (m, row) in f.rows().enumerate() {
        let _ = write!(out, "{m}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Notch transmittance over `offsets` (Hz from the notch centre).
pub fn fbg_transmission_csv(fbg: &FbgProfile, offsets: &[f64]) -> Result<String> {
    let ghz: Vec<f64> = offsets.iter().map(|f| f / 1e9).collect();
    let db = offsets
        .iter()
        .map(|&f| fbg_transmission_db(fbg, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(columns(&["offset_ghz", "transmittance_db"], &[&ghz, &db]))
}

/// Dense response of a designed filter from 0 Hz to Nyquist.
pub fn filter_response_csv(coeffs: &FilterCoeffs, points: usize) -> String {
    let nyq = coeffs.spec.sample_rate / 2.0;
    let n = points.max(2);
    let f: Vec<f64> = (0..n).map(|i| nyq * i as f64 / (n - 1) as f64).collect();
    let h: Vec<_> = f.iter().map(|&v| coeffs.response(v)).collect();
    let db: Vec<f64> = h.iter().map(|c| 20.0 * c.norm().log10()).collect();
    let ph: Vec<f64> = h.iter().map(|c| c.arg()).collect();
    columns(&["freq_hz", "magnitude_db", "phase_rad"], &[&f, &db, &ph])
}

/// Second-order sections, one per line, plus the overall gain.
pub fn sections_csv(coeffs: &FilterCoeffs) -> String {
    let mut out = String::from("section,b0,b1,b2,a1,a2\n");
    for (i, s) in coeffs.sections.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{},{},{},{}", s.b[0], s.b[1], s.b[2], s.a[0], s.a[1]);
    }
    let _ = writeln!(out, "gain,{},0,0,0,0", coeffs.gain);
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

pub fn sweep_csv(r: &SweepReport) -> String {
    let mut out = String::from(
        "label,modality,duration_s,resp_rpm,heart_bpm,resp_3db_hz,heart_3db_hz,resp_error_rpm,heart_error_bpm,flag\n",
    );
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            row.label,
            row.modality,
            row.duration_s,
            opt(row.resp_rate),
            opt(row.heart_rate),
            opt(row.resp_3db_hz),
            opt(row.heart_3db_hz),
            opt(row.resp_error),
            opt(row.heart_error),
            row.flag.as_deref().unwrap_or("").replace(',', ";"),
        );
    }
    out
}

/// Monitored / actual / error table, one line per vital sign.
pub fn report_table_csv(rows: &[(String, &VitalsReport)]) -> String {
    let mut out = String::from("channel,label,modality,vital,monitored,actual,error,width_3db_hz,range_m\n");
    let cell = |e: &VitalEstimate| -> [String; 4] {
        [
            e.rate_display.clone().unwrap_or_else(|| "not detected".into()),
            e.truth.map_or(String::new(), |t| format!("{t:.1}")),
            e.error_display.clone().unwrap_or_default(),
            opt(e.width_3db_hz),
        ]
    };
    for (channel, r) in rows {
        for (name, e) in [("respiration_rpm", &r.respiration), ("heartbeat_bpm", &r.heartbeat)] {
            let [m, a, err, w] = cell(e);
            let _ = writeln!(
                out,
                "{channel},{},{},{name},{m},{a},{err},{w},{}",
                r.label,
                r.modality,
                r.range_estimate_m.map_or(String::new(), |v| format!("{v:.4}"))
            );
        }
    }
    out
}
