//! Noise-floor, peak, SNR and detectability extraction from spectra.
//!
//! The floor estimator is the mean over all bins excluding DC and a guard
//! region around the peak; its companion spread is the across-bin standard
//! deviation of the same bins, which for an M-fold averaged spectrum is the
//! per-bin standard deviation of the average. A line is called detectable
//! when its bin exceeds `floor + threshold_sigma·floor_std`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probe::{ModulationParams, ProbeParams};
use crate::spectral::{db, Spectrum};

/// Bins excluded on each side of the peak when estimating the floor.
pub const DEFAULT_GUARD_BINS: usize = 2;
/// Default detectability threshold in floor standard deviations.
pub const DEFAULT_THRESHOLD_SIGMA: f64 = 3.0;

/// Extracted spectral figures for one spectrum: floor statistics, line
/// height at the modulation bin, their ratio, and the detection verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSummary {
    /// Mean PSD over non-excluded bins, counts²/Hz.
    pub floor: f64,
    /// Across-bin standard deviation of the same bins, counts²/Hz.
    pub floor_std: f64,
    /// PSD value at the peak bin, counts²/Hz.
    pub peak: f64,
    /// Index of the grid bin the peak was read from.
    pub peak_bin: usize,
    /// Frequency of that bin in Hz.
    pub peak_freq_hz: f64,
    /// peak / floor.
    pub snr: f64,
    /// 10·log₁₀(snr).
    pub snr_db: f64,
    /// peak > floor + threshold_sigma·floor_std.
    pub detectable: bool,
    pub threshold_sigma: f64,
}

fn floor_over_bins(
    spectrum: &Spectrum,
    peak_bin: usize,
    guard_bins: usize,
) -> Result<(f64, f64)> {
    let lo = peak_bin.saturating_sub(guard_bins);
    let hi = peak_bin + guard_bins;
    let kept: Vec<f64> = spectrum
        .psd
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != 0 && (*j < lo || *j > hi))
        .map(|(_, &v)| v)
        .collect();
    if kept.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "floor estimation needs at least 10 bins after exclusions, got {}",
            kept.len()
        )));
    }
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    let var = kept.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (kept.len() - 1) as f64;
    Ok((mean, var.sqrt()))
}

/// Mean and across-bin standard deviation of the PSD, excluding DC and the
/// peak bin ± `guard_bins`.
pub fn noise_floor(spectrum: &Spectrum, peak_freq: f64, guard_bins: usize) -> Result<(f64, f64)> {
    let peak_bin = spectrum.nearest_bin(peak_freq)?;
    floor_over_bins(spectrum, peak_bin, guard_bins)
}

/// PSD value at the grid bin nearest to `peak_freq`, with the bin index.
pub fn peak_height(spectrum: &Spectrum, peak_freq: f64) -> Result<(f64, usize)> {
    let bin = spectrum.nearest_bin(peak_freq)?;
    Ok((spectrum.psd[bin], bin))
}

/// Combines [`noise_floor`] and [`peak_height`] into a [`SpectralSummary`]
/// with the default 3σ detectability threshold.
pub fn snr(spectrum: &Spectrum, peak_freq: f64, guard_bins: usize) -> Result<SpectralSummary> {
    snr_with_threshold(spectrum, peak_freq, guard_bins, DEFAULT_THRESHOLD_SIGMA)
}

/// [`snr`] with an explicit detectability threshold in floor standard
/// deviations.
pub fn snr_with_threshold(
    spectrum: &Spectrum,
    peak_freq: f64,
    guard_bins: usize,
    threshold_sigma: f64,
) -> Result<SpectralSummary> {
    let (peak, peak_bin) = peak_height(spectrum, peak_freq)?;
    let (floor, floor_std) = floor_over_bins(spectrum, peak_bin, guard_bins)?;
    if floor <= 0.0 || !floor.is_finite() {
        return Err(Error::Data(format!(
            "noise floor must be positive, got {floor}; the record carries no counts"
        )));
    }
    let snr = peak / floor;
    Ok(SpectralSummary {
        floor,
        floor_std,
        peak,
        peak_bin,
        peak_freq_hz: spectrum.frequencies[peak_bin],
        snr,
        snr_db: db(snr),
        detectable: peak > floor + threshold_sigma * floor_std,
        threshold_sigma,
    })
}

/// Ideal-visibility spectral SNR of the modulation line per unit resolution
/// bandwidth: `λ·A²·N/8`. Multiply by the acquisition time T to compare
/// against a measured peak/floor ratio (whose resolution bandwidth is 1/T),
/// and by V² when the fringe visibility is below one.
pub fn snr_theory(probe: &ProbeParams, modulation: &ModulationParams) -> f64 {
    probe.total_flux * modulation.amplitude * modulation.amplitude * f64::from(probe.n_photons)
        / 8.0
}

/// [`snr_theory`] scaled by the probe's V², for comparison against
/// imperfect-visibility measurements.
pub fn snr_theory_with_visibility(probe: &ProbeParams, modulation: &ModulationParams) -> f64 {
    snr_theory(probe, modulation) * probe.visibility * probe.visibility
}
