use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    InvalidParameter { what: &'static str, reason: String },

    #[error("filter design failed: {0}")]
    Design(String),

    #[error("length mismatch: {what} has {got} samples, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("series too short: {got} samples, need more than {min}")]
    SeriesTooShort { got: usize, min: usize },

    #[error("record too short: {got_s:.3} s, need at least {min_s:.3} s")]
    RecordTooShort { got_s: f64, min_s: f64 },

    #[error("target '{label}' at {range_m:.3} m is beyond the unambiguous range {max_m:.3} m")]
    TargetOutOfRange { label: String, range_m: f64, max_m: f64 },

    #[error("no range peak within {tolerance_bins} bins of {requested_m:.4} m{}", nearest_hint(*.nearest_m))]
    NoPeakNearRange {
        requested_m: f64,
        nearest_m: Option<f64>,
        tolerance_bins: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("channel {channel}: {source}")]
    Channel {
        channel: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: malformed data at byte offset {offset}: {reason}", path.display())]
    Format { path: PathBuf, offset: u64, reason: String },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn nearest_hint(nearest: Option<f64>) -> String {
    match nearest {
        Some(r) => format!(" (nearest peak at {r:.4} m)"),
        None => " (profile has no peaks)".to_string(),
    }
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_channel(self, channel: impl Into<String>) -> Self {
        Error::Channel {
            channel: channel.into(),
            source: Box::new(self),
        }
    }
}
