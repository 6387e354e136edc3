//! Closed-form predictions used as ground truth in tests and as `theory_*`
//! overlays in experiment outputs.
//!
//! For a probe of photon number N and detected flux λ under a modulation of
//! amplitude A at the mid-fringe point, the PSD is a flat floor plus a
//! single line at the modulation frequency:
//!
//! * floor = λ/(2N)/f₀²  — scales as 1/N at fixed energy,
//! * line  = (λ·V·A)²/(16·f₀²)·T — independent of N.
//!
//! The line is a spectral δ discretized onto one resolution bin of width
//! 1/T, hence the factor T: the bin value integrates to the δ weight over
//! one bin. Backgrounds are not part of these formulas; they describe the
//! ideal fringe response.

use serde::Serialize;

use crate::analysis::snr_theory_with_visibility;
use crate::probe::{ModulationParams, ProbeParams};
use crate::sim::SimulationConfig;

/// Predicted floor and line for one probe/modulation/acquisition setting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedSpectrum {
    /// λ/(2N)/f₀² in counts²/Hz.
    pub floor: f64,
    /// (λ·V·A)²/(16·f₀²)·T in counts²/Hz.
    pub peak_value: f64,
    /// Modulation frequency in Hz.
    pub peak_freq: f64,
    /// Resolution bandwidth 1/T in Hz.
    pub resolution_bw: f64,
}

/// Predicted PSD decomposition for the given probe and acquisition window.
pub fn predicted_spectrum(
    probe: &ProbeParams,
    modulation: &ModulationParams,
    cfg: &SimulationConfig,
) -> PredictedSpectrum {
    let f0 = cfg.bin_rate;
    let floor = probe.mean_rate() / (f0 * f0);
    let line_amplitude = probe.total_flux * probe.visibility * modulation.amplitude;
    let peak_value = line_amplitude * line_amplitude / (16.0 * f0 * f0) * cfg.duration;
    PredictedSpectrum {
        floor,
        peak_value,
        peak_freq: modulation.frequency,
        resolution_bw: 1.0 / cfg.duration,
    }
}

/// Predicted peak/floor ratio of the averaged PSD: `λ·V²·A²·N/8 · T`.
/// Equal to `predicted_spectrum().peak_value / floor` by construction.
pub fn predicted_snr(
    probe: &ProbeParams,
    modulation: &ModulationParams,
    cfg: &SimulationConfig,
) -> f64 {
    snr_theory_with_visibility(probe, modulation) * cfg.duration
}
