//! Python bindings. Structured results cross the boundary as plain dicts and
//! lists built from the same JSON the CLI writes.

use std::path::PathBuf;

use pyo3::exceptions::{PyKeyError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use vitalchirp::dsp::{self, BandpassSpec, FilterCoeffs};
use vitalchirp::io;
use vitalchirp::photonic::{self, FbgProfile, IfLfmParams};
use vitalchirp::physio::{make_time_grid, synth_motion, SubjectVitals};
use vitalchirp::pipelines::{self, ProcessingConfig};
use vitalchirp::scenario::{self, Scenario};
use vitalchirp::Error;

fn to_py_err(e: Error) -> PyErr {
    match &e {
        Error::Channel { source, .. } => match **source {
            Error::Io { .. } | Error::Format { .. } | Error::Json { .. } => PyOSError::new_err(e.to_string()),
            Error::InvalidParameter { .. } | Error::Design(_) | Error::TargetOutOfRange { .. } => {
                PyValueError::new_err(e.to_string())
            }
            _ => PyRuntimeError::new_err(e.to_string()),
        },
        Error::Io { .. } | Error::Format { .. } | Error::Json { .. } => PyOSError::new_err(e.to_string()),
        Error::InvalidParameter { .. } | Error::Design(_) | Error::TargetOutOfRange { .. } | Error::Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn processing(dc_comp: bool) -> ProcessingConfig {
    ProcessingConfig {
        dc_compensation: dc_comp,
        ..ProcessingConfig::default()
    }
}

/// Transmit chirp obtained by quadrupling an IF LFM drive.
#[pyfunction]
#[pyo3(signature = (center_freq=6.6e9, bandwidth=1.0e9, pulse_period=100e-6, pulse_width=60e-6))]
fn derive_chirp(
    py: Python<'_>,
    center_freq: f64,
    bandwidth: f64,
    pulse_period: f64,
    pulse_width: f64,
) -> PyResult<Bound<'_, PyAny>> {
    let p = IfLfmParams {
        center_freq,
        bandwidth,
        pulse_period,
        pulse_width,
    };
    let c = photonic::derive_chirp(&p).map_err(to_py_err)?;
    to_py(py, &c)
}

/// FBG transmittance in dB at each frequency offset (Hz) from the Bragg
/// frequency.
#[pyfunction]
fn fbg_transmission_db(notch_depth_db: f64, fwhm_hz: f64, offsets_hz: Vec<f64>) -> PyResult<Vec<f64>> {
    let fbg = FbgProfile::new(notch_depth_db, fwhm_hz);
    offsets_hz
        .iter()
        .map(|&f| photonic::fbg_transmission_db(&fbg, f))
        .collect::<Result<_, _>>()
        .map_err(to_py_err)
}

/// Chest-wall displacement in mm for a subject with the given rates.
#[pyfunction]
#[pyo3(signature = (respiration_rpm, heartbeat_bpm, duration, sample_rate=50.0))]
fn synth_chest_motion(respiration_rpm: f64, heartbeat_bpm: f64, duration: f64, sample_rate: f64) -> PyResult<Vec<f64>> {
    let subject = SubjectVitals::new("subject", respiration_rpm, heartbeat_bpm);
    let grid = make_time_grid(duration, sample_rate).map_err(to_py_err)?;
    synth_motion(&subject, &grid).map_err(to_py_err)
}

/// Elliptic band-pass as cascaded second-order sections.
#[pyclass(name = "BandpassFilter", frozen)]
struct PyBandpass {
    inner: FilterCoeffs,
}

#[pymethods]
impl PyBandpass {
    #[new]
    #[pyo3(signature = (low_hz, high_hz, sample_rate=50.0, order=4, ripple_db=1.0, atten_db=40.0))]
    fn new(low_hz: f64, high_hz: f64, sample_rate: f64, order: usize, ripple_db: f64, atten_db: f64) -> PyResult<Self> {
        let spec = BandpassSpec {
            low_edge: low_hz,
            high_edge: high_hz,
            sample_rate,
            passband_ripple: ripple_db,
            stopband_atten: atten_db,
            order,
        };
        let inner = dsp::design_bandpass(&spec).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// Rows of (b0, b1, b2, a1, a2); a0 is 1.
    #[getter]
    fn sections(&self) -> Vec<[f64; 5]> {
        self.inner
            .sections
            .iter()
            .map(|s| [s.b[0], s.b[1], s.b[2], s.a[0], s.a[1]])
            .collect()
    }

    #[getter]
    fn gain(&self) -> f64 {
        self.inner.gain
    }

    #[getter]
    fn stopband_edges(&self) -> (f64, f64) {
        self.inner.stopband_edges
    }

    /// Magnitude response in dB at the given frequencies (Hz).
    fn response_db(&self, freqs_hz: Vec<f64>) -> Vec<f64> {
        freqs_hz.iter().map(|&f| self.inner.response_db(f)).collect()
    }

    /// Passband, stopband and stability figures on a dense grid.
    #[pyo3(signature = (points=4096))]
    fn conformance<'py>(&self, py: Python<'py>, points: usize) -> PyResult<Bound<'py, PyAny>> {
        let c = self.inner.conformance(points);
        let d = to_py(py, &c)?;
        d.set_item("conforms", c.meets(&self.inner.spec))?;
        Ok(d)
    }

    /// Forward-backward filtering with odd padding.
    fn filtfilt(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        dsp::filter_zero_phase(&self.inner, &x).map_err(to_py_err)
    }
}

/// Respiration and heartbeat estimates from a detected FBG power series.
#[pyfunction]
#[pyo3(signature = (series, sample_rate, truth_rpm=None, truth_bpm=None))]
fn contact_rates(
    py: Python<'_>,
    series: Vec<f64>,
    sample_rate: f64,
    truth_rpm: Option<f64>,
    truth_bpm: Option<f64>,
) -> PyResult<Bound<'_, PyAny>> {
    let truth = match (truth_rpm, truth_bpm) {
        (Some(r), Some(h)) => Some(SubjectVitals::new("contact", r, h)),
        (None, None) => None,
        _ => return Err(PyValueError::new_err("give both truth_rpm and truth_bpm or neither")),
    };
    let r = pipelines::contact_rates(&series, sample_rate, truth.as_ref(), &ProcessingConfig::default())
        .map_err(to_py_err)?;
    to_py(py, &r)
}

/// A multi-channel scene description.
#[pyclass(name = "Scenario")]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    /// Built-in scene: single_channel, three_volunteers, two_contact,
    /// two_channel.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let inner = match name {
            "single_channel" => Scenario::single_channel(),
            "three_volunteers" => Scenario::three_volunteers(),
            "two_contact" => Scenario::two_contact(),
            "two_channel" => Scenario::two_channel(),
            other => return Err(PyValueError::new_err(format!("unknown preset {other:?}"))),
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner).expect("serialisable")
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.seed = seed;
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration
    }

    #[setter]
    fn set_duration(&mut self, d: f64) {
        self.inner.duration = d;
    }

    /// Dict with `violations`, `warnings` and `is_valid`.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = scenario::validate_scenario(&self.inner);
        let d = to_py(py, &r)?;
        d.set_item("is_valid", r.is_valid())?;
        Ok(d)
    }

    fn run(&self) -> PyResult<PyBundle> {
        let inner = scenario::run_scenario(&self.inner).map_err(to_py_err)?;
        Ok(PyBundle { inner })
    }
}

/// Synthesised per-channel records.
#[pyclass(name = "Bundle")]
struct PyBundle {
    inner: scenario::Bundle,
}

impl PyBundle {
    fn channel(&self, key: &str) -> PyResult<&scenario::ChannelData> {
        self.inner
            .channels
            .iter()
            .find(|c| c.key() == key)
            .ok_or_else(|| PyKeyError::new_err(key.to_string()))
    }
}

#[pymethods]
impl PyBundle {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let inner = io::read_bundle(&path).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// Writes the bundle directory and returns the manifest as a dict.
    fn write<'py>(&self, py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
        let m = io::write_bundle(&path, &self.inner, io::RunManifest::new("python", Default::default()))
            .map_err(to_py_err)?;
        to_py(py, &m)
    }

    /// Channel keys, wavelength in nm to two decimals.
    #[getter]
    fn channels(&self) -> Vec<String> {
        self.inner.channels.iter().map(|c| c.key()).collect()
    }

    /// Detected contact power series and its sample rate.
    fn contact(&self, key: &str) -> PyResult<(Vec<f64>, f64)> {
        let c = self.channel(key)?;
        let rec = c
            .contact
            .as_ref()
            .ok_or_else(|| PyValueError::new_err(format!("channel {key} has no contact record")))?;
        Ok((rec.intensity.samples.clone(), rec.intensity.sample_rate))
    }

    /// De-chirped frames as a list of rows.
    fn frames(&self, key: &str) -> PyResult<Vec<Vec<f64>>> {
        let c = self.channel(key)?;
        let f = c
            .frames
            .as_ref()
            .ok_or_else(|| PyValueError::new_err(format!("channel {key} has no radar frames")))?;
        Ok(f.rows().map(<[f64]>::to_vec).collect())
    }

    /// Rate reports for every channel and subject.
    #[pyo3(signature = (duration=None, dc_comp=false, use_truth=true))]
    fn process<'py>(
        &self,
        py: Python<'py>,
        duration: Option<f64>,
        dc_comp: bool,
        use_truth: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let r = scenario::process_bundle(&self.inner, &processing(dc_comp), duration, use_truth).map_err(to_py_err)?;
        to_py(py, &r)
    }
}

#[pymodule]
pub fn vitalchirp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(derive_chirp, m)?)?;
    m.add_function(wrap_pyfunction!(fbg_transmission_db, m)?)?;
    m.add_function(wrap_pyfunction!(synth_chest_motion, m)?)?;
    m.add_function(wrap_pyfunction!(contact_rates, m)?)?;
    m.add_class::<PyBandpass>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyBundle>()?;
    Ok(())
}
