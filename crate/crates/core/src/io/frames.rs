//! Frame container: magic, header length, JSON header, f64 payload.
//!
//! ```text
//! offset 0       8 bytes   b"VCHIRPF1"
//! offset 8       u64 LE    header length H
//! offset 16      H bytes   UTF-8 JSON header
//! offset 16 + H  8 * slow_count * fast_count bytes, f64 LE, row-major
//! ```

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::{read_file, write_file};
use crate::photonic::ChirpParams;
use crate::radar::{AcquisitionParams, DechirpFrameSet};
use crate::{Error, Result};

pub const FRAMES_MAGIC: &[u8; 8] = b"VCHIRPF1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramesHeader {
    pub format_version: u32,
    pub slow_count: usize,
    pub fast_count: usize,
    pub slow_rate: f64,
    pub fast_rate: f64,
    pub chirp: ChirpParams,
    pub acquisition: AcquisitionParams,
    /// Always "f64-le".
    pub sample_type: String,
    /// Always "row-major" (slow index outer).
    pub layout: String,
}

pub fn encode_frames(frames: &DechirpFrameSet) -> Result<Vec<u8>> {
    frames.validate()?;
    let header = FramesHeader {
        format_version: FORMAT_VERSION,
        slow_count: frames.slow_count,
        fast_count: frames.fast_count,
        slow_rate: frames.slow_rate,
        fast_rate: frames.fast_rate,
        chirp: frames.chirp,
        acquisition: frames.acquisition,
        sample_type: "f64-le".into(),
        layout: "row-major".into(),
    };
    let json = serde_json::to_vec(&header).expect("header serialises");
    let mut out = Vec::with_capacity(16 + json.len() + 8 * frames.samples.len());
    out.extend_from_slice(FRAMES_MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in &frames.samples {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Parses a frame container. `path` is only used in error messages.
pub fn decode_frames(bytes: &[u8], path: &Path) -> Result<DechirpFrameSet> {
    let bad = |offset: usize, reason: String| Error::Format {
        path: path.into(),
        offset: offset as u64,
        reason,
    };
    if bytes.len() < 16 {
        return Err(bad(
            0,
            format!("file is {} bytes, shorter than the 16-byte preamble", bytes.len()),
        ));
    }
    if &bytes[..8] != FRAMES_MAGIC {
        return Err(bad(0, "bad magic, expected VCHIRPF1".into()));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let body = 16u64
        .checked_add(hlen)
        .filter(|&e| e <= bytes.len() as u64)
        .ok_or_else(|| bad(8, format!("header length {hlen} runs past the end of the file")))? as usize;
    let header: FramesHeader =
        serde_json::from_slice(&bytes[16..body]).map_err(|e| bad(16 + e.column().saturating_sub(1), e.to_string()))?;
    if header.format_version != FORMAT_VERSION {
        return Err(bad(16, format!("unsupported format version {}", header.format_version)));
    }
    if header.sample_type != "f64-le" || header.layout != "row-major" {
        return Err(bad(
            16,
            format!("unsupported sample layout {} / {}", header.sample_type, header.layout),
        ));
    }
    let count = header
        .slow_count
        .checked_mul(header.fast_count)
        .ok_or_else(|| bad(16, "frame shape overflows".into()))?;
    let payload = &bytes[body..];
    if payload.len() as u64 != 8 * count as u64 {
        return Err(bad(
            body + payload.len().min(8 * count),
            format!(
                "payload is {} bytes, expected {} for {} x {} samples",
                payload.len(),
                8 * count,
                header.slow_count,
                header.fast_count
            ),
        ));
    }
    let mut samples = Vec::with_capacity(count);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(bad(body + 8 * i, format!("non-finite sample {v}")));
        }
        samples.push(v);
    }
    let frames = DechirpFrameSet {
        samples,
        slow_count: header.slow_count,
        fast_count: header.fast_count,
        slow_rate: header.slow_rate,
        fast_rate: header.fast_rate,
        chirp: header.chirp,
        acquisition: header.acquisition,
        truth: None,
    };
    frames.validate().map_err(|e| bad(16, e.to_string()))?;
    Ok(frames)
}

pub fn write_frames(path: &Path, frames: &DechirpFrameSet) -> Result<()> {
    write_file(path, &encode_frames(frames)?)
}

/// Reads a frame container; ground truth is not part of it.
pub fn read_frames(path: &Path) -> Result<DechirpFrameSet> {
    decode_frames(&read_file(path)?, path)
}
