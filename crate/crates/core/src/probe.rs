//! Closed-form fringe model: instantaneous N-fold detection rates of a
//! path-entangled N-photon probe under sinusoidal phase modulation.
//!
//! The probe accumulates phase N times faster than a single photon, so the
//! N-fold coincidence rate follows `λ/(2N)·[1 ± V·cos(Nφ)]`. The `1/(2N)`
//! prefactor keeps the total optical energy per measurement fixed across
//! probes of different photon number, which is what makes floor-level
//! comparisons between probes meaningful. `λ` is the *detected* flux; no
//! additional efficiency rescaling is applied.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign of the interference term in the fringe law.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FringeSign {
    #[default]
    Plus,
    Minus,
}

impl FringeSign {
    pub fn value(self) -> f64 {
        match self {
            FringeSign::Plus => 1.0,
            FringeSign::Minus => -1.0,
        }
    }

    /// Builds a sign from the conventional ±1 integer encoding.
    pub fn from_i8(v: i8) -> Result<Self> {
        match v {
            1 => Ok(FringeSign::Plus),
            -1 => Ok(FringeSign::Minus),
            other => Err(Error::InvalidArgument(format!(
                "fringe sign must be +1 or -1, got {other}"
            ))),
        }
    }
}

/// Probe definition: photon number N, detected flux λ (photons/s),
/// fringe visibility V in [0, 1], and the fringe sign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    pub n_photons: u32,
    pub total_flux: f64,
    pub visibility: f64,
    pub fringe_sign: FringeSign,
}

impl ProbeParams {
    pub fn new(
        n_photons: u32,
        total_flux: f64,
        visibility: f64,
        fringe_sign: FringeSign,
    ) -> Result<Self> {
        if n_photons < 1 {
            return Err(Error::InvalidArgument(
                "photon number must be at least 1".into(),
            ));
        }
        if total_flux <= 0.0 || !total_flux.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "total flux must be positive and finite, got {total_flux}"
            )));
        }
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidArgument(format!(
                "visibility must lie in [0, 1], got {visibility}"
            )));
        }
        Ok(Self {
            n_photons,
            total_flux,
            visibility,
            fringe_sign,
        })
    }

    /// Mean detection rate at the mid-fringe operating point: λ/(2N).
    pub fn mean_rate(&self) -> f64 {
        self.total_flux / (2.0 * f64::from(self.n_photons))
    }

    /// Instantaneous N-fold detection rate at interferometer phase `phase`:
    /// `λ/(2N)·[1 + sign·V·cos(N·phase)]`, in counts/s. Non-negative for
    /// any phase as long as V ≤ 1.
    pub fn detection_rate(&self, phase: f64) -> f64 {
        let n = f64::from(self.n_photons);
        self.mean_rate() * (1.0 + self.fringe_sign.value() * self.visibility * (n * phase).cos())
    }

    /// First-order expansion of [`Self::detection_rate`] around the
    /// mid-fringe point φ₀ = π/(2N):
    /// `λ/(2N) − sign·(λ/2)·V·A·cos(2π f t)`.
    ///
    /// The oscillating term carries `−fringe_sign` because the fringe slope
    /// at mid-fringe is `d cos(Nφ)/dφ = −N`. Its amplitude `(λ/2)·V·A` is
    /// independent of N: probes of different photon number trace fringes of
    /// identical amplitude. Valid in the small-modulation regime with the
    /// operating point at mid-fringe; intended as a diagnostic/reference,
    /// the simulator itself always samples the exact rate.
    pub fn linearized_rate(&self, modulation: &ModulationParams, t: f64) -> f64 {
        let carrier = (2.0 * PI * modulation.frequency * t).cos();
        self.mean_rate()
            - self.fringe_sign.value()
                * 0.5
                * self.total_flux
                * self.visibility
                * modulation.amplitude
                * carrier
    }

    /// True when the modulation's operating point sits at this probe's
    /// mid-fringe phase π/(2N) (within 1e-9 rad).
    pub fn is_mid_fringe(&self, modulation: &ModulationParams) -> bool {
        (modulation.operating_point - PI / (2.0 * f64::from(self.n_photons))).abs() < 1e-9
    }
}

/// Sinusoidal phase modulation `φ(t) = A·cos(2π f t) + φ₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    /// Modulation amplitude A in radians.
    pub amplitude: f64,
    /// Modulation frequency f in Hz.
    pub frequency: f64,
    /// Static operating point φ₀ in radians.
    pub operating_point: f64,
}

impl ModulationParams {
    pub fn new(amplitude: f64, frequency: f64, operating_point: f64) -> Result<Self> {
        if amplitude < 0.0 || !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "modulation amplitude must be non-negative, got {amplitude}"
            )));
        }
        if frequency <= 0.0 || !frequency.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "modulation frequency must be positive, got {frequency}"
            )));
        }
        Ok(Self {
            amplitude,
            frequency,
            operating_point,
        })
    }

    /// Instantaneous interferometer phase `A·cos(2π f t) + φ₀` in radians.
    pub fn phase_at(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * t).cos() + self.operating_point
    }

    /// Modulation period 1/f in seconds.
    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    /// Small-signal guard: the linearized fringe response is trustworthy
    /// only for A well below the visibility; callers warn when this fails.
    pub fn linear_regime_ok(&self, visibility: f64) -> bool {
        self.amplitude <= 0.2 * visibility
    }
}

/// Mid-fringe operating point π/(2N) for an N-photon probe, the phase bias
/// at which the phase-to-intensity response is steepest.
pub fn operating_point(n_photons: u32) -> Result<f64> {
    if n_photons < 1 {
        return Err(Error::InvalidArgument(
            "photon number must be at least 1".into(),
        ));
    }
    Ok(PI / (2.0 * f64::from(n_photons)))
}
