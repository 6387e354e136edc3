//! Python bindings for the noonspec core: probe fringe model, Poisson
//! count simulation, periodogram/PSD estimation and SNR extraction.
//!
//! Build as an extension module (see `python/smoke_test.py` for a driver):
//!
//! ```text
//! cargo build -p noonspec-py --release
//! cp target/release/libnoonspec_py.so noonspec_py.so
//! python -c "import noonspec_py"
//! ```

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use noonspec::analysis;
use noonspec::oracle;
use noonspec::probe;
use noonspec::sim;
use noonspec::spectral;

fn to_py_err(e: noonspec::Error) -> PyErr {
    match e {
        noonspec::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Probe definition: photon number N, detected flux λ, visibility V and
/// fringe sign (+1/−1).
#[pyclass(name = "ProbeParams", from_py_object)]
#[derive(Clone)]
struct PyProbeParams {
    inner: probe::ProbeParams,
}

#[pymethods]
impl PyProbeParams {
    #[new]
    #[pyo3(signature = (n_photons, total_flux, visibility, fringe_sign = 1))]
    fn new(n_photons: u32, total_flux: f64, visibility: f64, fringe_sign: i8) -> PyResult<Self> {
        let sign = probe::FringeSign::from_i8(fringe_sign).map_err(to_py_err)?;
        Ok(Self {
            inner: probe::ProbeParams::new(n_photons, total_flux, visibility, sign)
                .map_err(to_py_err)?,
        })
    }

    #[getter]
    fn n_photons(&self) -> u32 {
        self.inner.n_photons
    }

    #[getter]
    fn total_flux(&self) -> f64 {
        self.inner.total_flux
    }

    #[getter]
    fn visibility(&self) -> f64 {
        self.inner.visibility
    }

    #[getter]
    fn fringe_sign(&self) -> i8 {
        self.inner.fringe_sign.value() as i8
    }

    /// Mean detection rate λ/(2N) at the mid-fringe operating point.
    fn mean_rate(&self) -> f64 {
        self.inner.mean_rate()
    }

    /// N-fold detection rate at the given interferometer phase, counts/s.
    fn detection_rate(&self, phase: f64) -> f64 {
        self.inner.detection_rate(phase)
    }

    /// First-order (mid-fringe) rate at time t under the given modulation.
    fn linearized_rate(&self, modulation: PyModulationParams, t: f64) -> f64 {
        self.inner.linearized_rate(&modulation.inner, t)
    }

    fn __repr__(&self) -> String {
        format!(
            "ProbeParams(n_photons={}, total_flux={}, visibility={}, fringe_sign={})",
            self.inner.n_photons,
            self.inner.total_flux,
            self.inner.visibility,
            self.inner.fringe_sign.value() as i8
        )
    }
}

/// Sinusoidal phase modulation A·cos(2πft) + φ₀.
#[pyclass(name = "ModulationParams", from_py_object)]
#[derive(Clone)]
struct PyModulationParams {
    inner: probe::ModulationParams,
}

#[pymethods]
impl PyModulationParams {
    #[new]
    fn new(amplitude: f64, frequency: f64, operating_point: f64) -> PyResult<Self> {
        Ok(Self {
            inner: probe::ModulationParams::new(amplitude, frequency, operating_point)
                .map_err(to_py_err)?,
        })
    }

    #[getter]
    fn amplitude(&self) -> f64 {
        self.inner.amplitude
    }

    #[getter]
    fn frequency(&self) -> f64 {
        self.inner.frequency
    }

    #[getter]
    fn operating_point(&self) -> f64 {
        self.inner.operating_point
    }

    /// Instantaneous phase at time t, radians.
    fn phase_at(&self, t: f64) -> f64 {
        self.inner.phase_at(t)
    }

    fn linear_regime_ok(&self, visibility: f64) -> bool {
        self.inner.linear_regime_ok(visibility)
    }

    fn __repr__(&self) -> String {
        format!(
            "ModulationParams(amplitude={}, frequency={}, operating_point={})",
            self.inner.amplitude, self.inner.frequency, self.inner.operating_point
        )
    }
}

/// Dark-count (singles) and accidental (coincidence) background rates.
#[pyclass(name = "DetectorImperfections", from_py_object)]
#[derive(Clone)]
struct PyDetectorImperfections {
    inner: sim::DetectorImperfections,
}

#[pymethods]
impl PyDetectorImperfections {
    #[new]
    #[pyo3(signature = (dark_rate = 0.0, accidental_rate = 0.0, window_note = String::new()))]
    fn new(dark_rate: f64, accidental_rate: f64, window_note: String) -> PyResult<Self> {
        Ok(Self {
            inner: sim::DetectorImperfections::new(dark_rate, accidental_rate, window_note)
                .map_err(to_py_err)?,
        })
    }

    #[getter]
    fn dark_rate(&self) -> f64 {
        self.inner.dark_rate
    }

    #[getter]
    fn accidental_rate(&self) -> f64 {
        self.inner.accidental_rate
    }

    /// Background rate seen by an N-photon channel.
    fn background_rate(&self, n_photons: u32) -> f64 {
        self.inner.background_rate(n_photons)
    }
}

/// Acquisition window, bin rate, realization count and base seed.
#[pyclass(name = "SimulationConfig", from_py_object)]
#[derive(Clone)]
struct PySimulationConfig {
    inner: sim::SimulationConfig,
}

#[pymethods]
impl PySimulationConfig {
    #[new]
    #[pyo3(signature = (duration, bin_rate, realizations = 1, base_seed = 0))]
    fn new(duration: f64, bin_rate: f64, realizations: u32, base_seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: sim::SimulationConfig::new(duration, bin_rate, realizations, base_seed)
                .map_err(to_py_err)?,
        })
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration
    }

    #[getter]
    fn bin_rate(&self) -> f64 {
        self.inner.bin_rate
    }

    #[getter]
    fn realizations(&self) -> u32 {
        self.inner.realizations
    }

    #[getter]
    fn base_seed(&self) -> u64 {
        self.inner.base_seed
    }

    fn bin_count(&self) -> usize {
        self.inner.bin_count()
    }
}

/// Binned detection-count record.
#[pyclass(name = "CountSeries", from_py_object)]
#[derive(Clone)]
struct PyCountSeries {
    inner: sim::CountSeries,
}

#[pymethods]
impl PyCountSeries {
    #[new]
    #[pyo3(signature = (counts, bin_rate, start_time = 0.0, label = String::new()))]
    fn new(counts: Vec<u64>, bin_rate: f64, start_time: f64, label: String) -> PyResult<Self> {
        Ok(Self {
            inner: sim::CountSeries::new(counts, bin_rate, start_time, label).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.inner.counts.clone()
    }

    #[getter]
    fn bin_rate(&self) -> f64 {
        self.inner.bin_rate
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "CountSeries(bins={}, bin_rate={}, label={:?})",
            self.inner.len(),
            self.inner.bin_rate,
            self.inner.label
        )
    }
}

/// One-sided PSD in counts²/Hz on a uniform frequency grid.
#[pyclass(name = "Spectrum", from_py_object)]
#[derive(Clone)]
struct PySpectrum {
    inner: spectral::Spectrum,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn frequencies(&self) -> Vec<f64> {
        self.inner.frequencies.clone()
    }

    #[getter]
    fn psd(&self) -> Vec<f64> {
        self.inner.psd.clone()
    }

    #[getter]
    fn psd_std(&self) -> Option<Vec<f64>> {
        self.inner.psd_std.clone()
    }

    #[getter]
    fn n_averaged(&self) -> u32 {
        self.inner.n_averaged
    }

    /// Frequency-grid spacing 1/T in Hz.
    fn resolution(&self) -> f64 {
        self.inner.resolution()
    }

    fn nearest_bin(&self, freq: f64) -> PyResult<usize> {
        self.inner.nearest_bin(freq).map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Spectrum(bins={}, resolution={} Hz, n_averaged={})",
            self.inner.len(),
            self.inner.resolution(),
            self.inner.n_averaged
        )
    }
}

/// Floor/peak/SNR summary of one spectrum.
#[pyclass(name = "SpectralSummary", from_py_object)]
#[derive(Clone)]
struct PySpectralSummary {
    inner: analysis::SpectralSummary,
}

#[pymethods]
impl PySpectralSummary {
    #[getter]
    fn floor(&self) -> f64 {
        self.inner.floor
    }

    #[getter]
    fn floor_std(&self) -> f64 {
        self.inner.floor_std
    }

    #[getter]
    fn peak(&self) -> f64 {
        self.inner.peak
    }

    #[getter]
    fn peak_bin(&self) -> usize {
        self.inner.peak_bin
    }

    #[getter]
    fn peak_freq_hz(&self) -> f64 {
        self.inner.peak_freq_hz
    }

    #[getter]
    fn snr(&self) -> f64 {
        self.inner.snr
    }

    #[getter]
    fn snr_db(&self) -> f64 {
        self.inner.snr_db
    }

    #[getter]
    fn detectable(&self) -> bool {
        self.inner.detectable
    }

    #[getter]
    fn threshold_sigma(&self) -> f64 {
        self.inner.threshold_sigma
    }

    fn __repr__(&self) -> String {
        format!(
            "SpectralSummary(floor={:.6e}, peak={:.6e}, snr_db={:.2}, detectable={})",
            self.inner.floor, self.inner.peak, self.inner.snr_db, self.inner.detectable
        )
    }
}

/// Closed-form floor and line prediction.
#[pyclass(name = "PredictedSpectrum", from_py_object)]
#[derive(Clone)]
struct PyPredictedSpectrum {
    inner: oracle::PredictedSpectrum,
}

#[pymethods]
impl PyPredictedSpectrum {
    #[getter]
    fn floor(&self) -> f64 {
        self.inner.floor
    }

    #[getter]
    fn peak_value(&self) -> f64 {
        self.inner.peak_value
    }

    #[getter]
    fn peak_freq(&self) -> f64 {
        self.inner.peak_freq
    }

    #[getter]
    fn resolution_bw(&self) -> f64 {
        self.inner.resolution_bw
    }

    fn __repr__(&self) -> String {
        format!(
            "PredictedSpectrum(floor={:.6e}, peak_value={:.6e}, peak_freq={})",
            self.inner.floor, self.inner.peak_value, self.inner.peak_freq
        )
    }
}

/// Mid-fringe operating point π/(2N) in radians.
#[pyfunction]
fn operating_point(n_photons: u32) -> PyResult<f64> {
    probe::operating_point(n_photons).map_err(to_py_err)
}

/// Per-realization RNG seed derived from (base_seed, realization_index).
#[pyfunction]
fn stream_seed(base_seed: u64, realization_index: u64) -> u64 {
    sim::stream_seed(base_seed, realization_index)
}

/// Draws one count record from a Python rate callable `rate_fn(t)→counts/s`
/// evaluated at bin midpoints.
#[pyfunction]
fn simulate_counts(
    rate_fn: Bound<'_, PyAny>,
    cfg: PySimulationConfig,
    realization_index: u64,
) -> PyResult<PyCountSeries> {
    let bins = cfg.inner.bin_count();
    let dt = 1.0 / cfg.inner.bin_rate;
    let mut rates = Vec::with_capacity(bins);
    for k in 0..bins {
        let t_mid = (k as f64 + 0.5) * dt;
        rates.push(rate_fn.call1((t_mid,))?.extract::<f64>()?);
    }
    let series = sim::simulate_counts(
        |t| rates[((t * cfg.inner.bin_rate) as usize).min(bins - 1)],
        &cfg.inner,
        realization_index,
    )
    .map_err(to_py_err)?;
    Ok(PyCountSeries { inner: series })
}

/// Simulates one acquisition of an N-photon probe channel.
#[pyfunction]
fn simulate_probe(
    probe: PyProbeParams,
    modulation: PyModulationParams,
    imperfections: PyDetectorImperfections,
    cfg: PySimulationConfig,
    realization_index: u64,
) -> PyResult<PyCountSeries> {
    sim::simulate_probe(
        &probe.inner,
        &modulation.inner,
        &imperfections.inner,
        &cfg.inner,
        realization_index,
    )
    .map(|inner| PyCountSeries { inner })
    .map_err(to_py_err)
}

/// Autocorrelation of the zero-mean counts up to `max_lag`, counts².
#[pyfunction]
fn empirical_autocorrelation(series: PyCountSeries, max_lag: usize) -> PyResult<Vec<f64>> {
    sim::empirical_autocorrelation(&series.inner, max_lag).map_err(to_py_err)
}

/// Periodogram of a count record, counts²/Hz.
#[pyfunction]
fn periodogram(series: PyCountSeries) -> PyResult<PySpectrum> {
    spectral::periodogram(&series.inner)
        .map(|inner| PySpectrum { inner })
        .map_err(to_py_err)
}

/// Periodogram of arbitrary real samples at the given bin rate.
#[pyfunction]
fn periodogram_samples(samples: Vec<f64>, bin_rate: f64) -> PyResult<PySpectrum> {
    spectral::periodogram_samples(&samples, bin_rate)
        .map(|inner| PySpectrum { inner })
        .map_err(to_py_err)
}

/// Per-bin mean and standard deviation of spectra on one grid.
#[pyfunction]
fn average_spectra(spectra: Vec<PySpectrum>) -> PyResult<PySpectrum> {
    let inner: Vec<spectral::Spectrum> = spectra.into_iter().map(|s| s.inner).collect();
    spectral::average_spectra(&inner)
        .map(|inner| PySpectrum { inner })
        .map_err(to_py_err)
}

/// Shot-noise PSD level λ/f₀² in counts²/Hz.
#[pyfunction]
fn shot_noise_level(flux: f64, bin_rate: f64) -> f64 {
    spectral::shot_noise_level(flux, bin_rate)
}

/// Spectrum mapped to dB re 1 count²/Hz.
#[pyfunction]
fn to_db(spectrum: PySpectrum) -> PySpectrum {
    PySpectrum {
        inner: spectral::to_db(&spectrum.inner),
    }
}

/// (floor, floor_std) excluding DC and the peak ± guard_bins.
#[pyfunction]
#[pyo3(signature = (spectrum, peak_freq, guard_bins = 2))]
fn noise_floor(spectrum: PySpectrum, peak_freq: f64, guard_bins: usize) -> PyResult<(f64, f64)> {
    analysis::noise_floor(&spectrum.inner, peak_freq, guard_bins).map_err(to_py_err)
}

/// (psd value, bin index) at the grid bin nearest to peak_freq.
#[pyfunction]
fn peak_height(spectrum: PySpectrum, peak_freq: f64) -> PyResult<(f64, usize)> {
    analysis::peak_height(&spectrum.inner, peak_freq).map_err(to_py_err)
}

/// Full floor/peak/SNR/detectability summary.
#[pyfunction]
#[pyo3(signature = (spectrum, peak_freq, guard_bins = 2, threshold_sigma = 3.0))]
fn snr(
    spectrum: PySpectrum,
    peak_freq: f64,
    guard_bins: usize,
    threshold_sigma: f64,
) -> PyResult<PySpectralSummary> {
    analysis::snr_with_threshold(&spectrum.inner, peak_freq, guard_bins, threshold_sigma)
        .map(|inner| PySpectralSummary { inner })
        .map_err(to_py_err)
}

/// Ideal-visibility SNR per unit resolution bandwidth: λ·A²·N/8.
#[pyfunction]
fn snr_theory(probe: PyProbeParams, modulation: PyModulationParams) -> f64 {
    analysis::snr_theory(&probe.inner, &modulation.inner)
}

/// `snr_theory` scaled by V².
#[pyfunction]
fn snr_theory_with_visibility(probe: PyProbeParams, modulation: PyModulationParams) -> f64 {
    analysis::snr_theory_with_visibility(&probe.inner, &modulation.inner)
}

/// Closed-form floor and line height for a probe/modulation/acquisition.
#[pyfunction]
fn predicted_spectrum(
    probe: PyProbeParams,
    modulation: PyModulationParams,
    cfg: PySimulationConfig,
) -> PyPredictedSpectrum {
    PyPredictedSpectrum {
        inner: oracle::predicted_spectrum(&probe.inner, &modulation.inner, &cfg.inner),
    }
}

/// Predicted peak/floor ratio of the averaged PSD: λ·V²·A²·N/8·T.
#[pyfunction]
fn predicted_snr(
    probe: PyProbeParams,
    modulation: PyModulationParams,
    cfg: PySimulationConfig,
) -> f64 {
    oracle::predicted_snr(&probe.inner, &modulation.inner, &cfg.inner)
}

#[pymodule]
fn noonspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProbeParams>()?;
    m.add_class::<PyModulationParams>()?;
    m.add_class::<PyDetectorImperfections>()?;
    m.add_class::<PySimulationConfig>()?;
    m.add_class::<PyCountSeries>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PySpectralSummary>()?;
    m.add_class::<PyPredictedSpectrum>()?;
    m.add_function(wrap_pyfunction!(operating_point, m)?)?;
    m.add_function(wrap_pyfunction!(stream_seed, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_counts, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_probe, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_autocorrelation, m)?)?;
    m.add_function(wrap_pyfunction!(periodogram, m)?)?;
    m.add_function(wrap_pyfunction!(periodogram_samples, m)?)?;
    m.add_function(wrap_pyfunction!(average_spectra, m)?)?;
    m.add_function(wrap_pyfunction!(shot_noise_level, m)?)?;
    m.add_function(wrap_pyfunction!(to_db, m)?)?;
    m.add_function(wrap_pyfunction!(noise_floor, m)?)?;
    m.add_function(wrap_pyfunction!(peak_height, m)?)?;
    m.add_function(wrap_pyfunction!(snr, m)?)?;
    m.add_function(wrap_pyfunction!(snr_theory, m)?)?;
    m.add_function(wrap_pyfunction!(snr_theory_with_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_snr, m)?)?;
    m.add("DB_FLOOR", spectral::DB_FLOOR)?;
    Ok(())
}
