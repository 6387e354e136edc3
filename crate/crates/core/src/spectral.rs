//! Periodogram estimation and PSD normalization.
//!
//! The one-sided power spectral density of a K-bin count record sampled at
//! f₀ is estimated as
//!
//! ```text
//! S[j] = |Σ_{k=0}^{K−1} I_k·e^{−2πi jk/K}|² / (K·f₀),   j = 0..K/2
//! ```
//!
//! in counts²/Hz on the grid j/T with resolution 1/T. Two conventions are
//! fixed here and relied on throughout:
//!
//! * The `1/(K·f₀)` normalization makes a homogeneous Poisson stream of
//!   flux λ average to the flat shot-noise level λ/f₀² at every non-DC
//!   bin, and an on-grid count modulation of amplitude `a` produce a line
//!   of height `a²K/(4f₀)`.
//! * The spectrum is one-sided but interior bins are **not** doubled, so
//!   the floor stays λ/f₀² rather than 2λ/f₀². This differs from some
//!   engineering conventions; floors, peaks and SNRs quoted anywhere in
//!   this crate use the unfolded convention.
//!
//! No windowing is applied (rectangular window): the tones of interest sit
//! exactly on the frequency grid, where rectangular is exact. Off-grid
//! tones scallop; that is a documented limitation rather than a supported
//! regime. Bin 0 carries the squared mean of the record (DC); it is kept
//! in the spectrum and in serialized output but excluded from all noise
//! statistics downstream.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sim::CountSeries;

/// dB value substituted for empty bins, where 10·log₁₀ diverges.
pub const DB_FLOOR: f64 = -300.0;

/// One-sided PSD on a uniform frequency grid, optionally with per-bin
/// standard deviations accumulated by [`average_spectra`].
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// Grid 0..f₀/2 with spacing 1/T, length K/2 + 1.
    pub frequencies: Vec<f64>,
    /// PSD in counts²/Hz (or dB after [`to_db`]).
    pub psd: Vec<f64>,
    /// Per-bin sample standard deviation over the averaged realizations.
    pub psd_std: Option<Vec<f64>>,
    /// Number of single-record periodograms averaged into `psd`.
    pub n_averaged: u32,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.psd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psd.is_empty()
    }

    /// Frequency-grid spacing 1/T in Hz (resolution bandwidth).
    pub fn resolution(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }

    /// DC bin: the squared mean of the record, scaled like every other bin.
    pub fn dc(&self) -> f64 {
        self.psd[0]
    }

    /// Index of the grid bin closest to `freq`, or an error when `freq`
    /// falls outside the grid by more than half a bin.
    pub fn nearest_bin(&self, freq: f64) -> Result<usize> {
        let df = self.resolution();
        let idx = (freq / df).round();
        if idx < 0.0 || idx as usize >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "frequency {freq} Hz is outside the spectral grid [0, {}] Hz",
                self.frequencies[self.len() - 1]
            )));
        }
        Ok(idx as usize)
    }
}

/// Periodogram of a binned count record, in counts²/Hz.
pub fn periodogram(series: &CountSeries) -> Result<Spectrum> {
    let samples: Vec<f64> = series.counts.iter().map(|&c| c as f64).collect();
    periodogram_samples(&samples, series.bin_rate)
}

/// Periodogram of arbitrary real samples at the given bin rate.
///
/// Same estimator as [`periodogram`]; exists so exact (non-integer)
/// waveforms can be analyzed and used as oracles in tests.
pub fn periodogram_samples(samples: &[f64], bin_rate: f64) -> Result<Spectrum> {
    let k = samples.len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "periodogram needs at least 2 samples, got {k}"
        )));
    }
    if bin_rate <= 0.0 || !bin_rate.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bin rate must be positive, got {bin_rate}"
        )));
    }
    let mut buffer: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(k);
    fft.process(&mut buffer);

    let n_out = k / 2 + 1;
    let norm = 1.0 / (k as f64 * bin_rate);
    let df = bin_rate / k as f64;
    let psd: Vec<f64> = buffer[..n_out].iter().map(|x| x.norm_sqr() * norm).collect();
    let frequencies: Vec<f64> = (0..n_out).map(|j| j as f64 * df).collect();
    Ok(Spectrum {
        frequencies,
        psd,
        psd_std: None,
        n_averaged: 1,
    })
}

/// Per-bin mean and sample standard deviation of a set of spectra sharing
/// one frequency grid. Averaging is done on the linear scale; convert to
/// dB only afterwards.
pub fn average_spectra(spectra: &[Spectrum]) -> Result<Spectrum> {
    let first = spectra
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot average zero spectra".into()))?;
    for s in &spectra[1..] {
        if s.frequencies != first.frequencies {
            return Err(Error::InvalidArgument(
                "spectra have mismatched frequency grids".into(),
            ));
        }
    }
    let n = spectra.len();
    let bins = first.len();
    let mut mean = vec![0.0; bins];
    for s in spectra {
        for (m, &v) in mean.iter_mut().zip(&s.psd) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut std = vec![0.0; bins];
    if n > 1 {
        for s in spectra {
            for ((sd, &v), &m) in std.iter_mut().zip(&s.psd).zip(&mean) {
                *sd += (v - m) * (v - m);
            }
        }
        for sd in &mut std {
            *sd = (*sd / (n - 1) as f64).sqrt();
        }
    }
    Ok(Spectrum {
        frequencies: first.frequencies.clone(),
        psd: mean,
        psd_std: Some(std),
        n_averaged: n as u32,
    })
}

/// Shot-noise PSD level λ/f₀² of a Poisson stream of flux λ binned at f₀,
/// in counts²/Hz.
pub fn shot_noise_level(flux: f64, bin_rate: f64) -> f64 {
    flux / (bin_rate * bin_rate)
}

/// 10·log₁₀(x) relative to 1 count²/Hz, with [`DB_FLOOR`] for x ≤ 0.
pub fn db(x: f64) -> f64 {
    if x > 0.0 {
        10.0 * x.log10()
    } else {
        DB_FLOOR
    }
}

/// Maps every PSD bin to dB (reference 1 count²/Hz). Empty bins map to the
/// [`DB_FLOOR`] sentinel. Per-bin standard deviations do not transform
/// meaningfully and are dropped.
pub fn to_db(spectrum: &Spectrum) -> Spectrum {
    Spectrum {
        frequencies: spectrum.frequencies.clone(),
        psd: spectrum.psd.iter().map(|&v| db(v)).collect(),
        psd_std: None,
        n_averaged: spectrum.n_averaged,
    }
}
