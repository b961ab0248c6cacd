//! On-disk formats: the frame container, CSV tables, dataset bundles and
//! run manifests. Byte layouts are specified in `docs/FORMATS.md`.

pub mod bundle;
pub mod csv;
pub mod frames;

pub use bundle::{read_bundle, write_bundle, RunManifest};
pub use frames::{read_frames, write_frames, FRAMES_MAGIC};

use sha2::{Digest, Sha256};
use std::path::Path;

use crate::{Error, Result};

/// Lower-case hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    text.push(b'\n');
    write_file(path, &text)
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })
}
