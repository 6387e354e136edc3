//! Run configuration: a strict TOML file with flat key–value sections.
//!
//! Unknown keys are a hard error so that a typo can never silently fall
//! back to a default. All randomness flows from the single `base_seed`
//! key; when absent the seed is 0 (never time-based), so default runs are
//! deterministic. The full grammar is documented in the project README.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Fig1Config, ProbeChannel, SweepConfig};
use crate::probe::{FringeSign, ProbeParams};
use crate::sim::{DetectorImperfections, SimulationConfig};

/// Default volume→amplitude calibration of the sweep, in radians at volume
/// 1.0. Chosen so that under the default detection channels below (80 kHz
/// singles and 40 kHz coincidences at 10 kHz sampling, 100 averages) the
/// single-photon line crosses the 3σ detectability threshold near volume
/// 0.24. The closed-form condition is
/// `((s+b)·V_eff·v·A_full)²·T/(4·f₀²) = 3/√M · (s+b)/f₀²` at v = 0.24.
pub const DEFAULT_AMPLITUDE_AT_FULL_RAD: f64 = 0.016241;

/// Fringe visibility that, once diluted by an additive background
/// (`V_eff = V·s/(s+b)`), lands on the requested effective value.
pub fn raw_visibility_for_effective(v_eff: f64, signal_rate: f64, background_rate: f64) -> f64 {
    v_eff * (signal_rate + background_rate) / signal_rate
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output directory; the CLI `--out` flag overrides it. Not part of
    /// the scientific configuration, so it is skipped in manifests.
    #[serde(default, skip_serializing)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub quiet: bool,
    pub sim: SimSection,
    pub modulation: ModulationSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    pub probes: Vec<ProbeSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub duration_s: f64,
    pub bin_rate_hz: f64,
    pub realizations: u32,
    #[serde(default)]
    pub base_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSection {
    pub frequency_hz: f64,
    /// Fixed modulation amplitude used by `fig1`; sweeps derive their
    /// amplitude from `volume × amplitude_at_full_rad` instead.
    #[serde(default)]
    pub amplitude_rad: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub volumes: Vec<f64>,
    pub amplitude_at_full_rad: f64,
    #[serde(default = "default_guard_bins")]
    pub guard_bins: usize,
    #[serde(default = "default_threshold_sigma")]
    pub threshold_sigma: f64,
}

fn default_guard_bins() -> usize {
    crate::analysis::DEFAULT_GUARD_BINS
}

fn default_threshold_sigma() -> f64 {
    crate::analysis::DEFAULT_THRESHOLD_SIGMA
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub n_photons: u32,
    pub total_flux_hz: f64,
    pub visibility: f64,
    /// +1 or −1.
    #[serde(default = "default_fringe_sign")]
    pub fringe_sign: i8,
    #[serde(default)]
    pub dark_rate_hz: f64,
    #[serde(default)]
    pub accidental_rate_hz: f64,
}

fn default_fringe_sign() -> i8 {
    1
}

impl ProbeSection {
    fn to_channel(&self) -> Result<ProbeChannel> {
        let probe = ProbeParams::new(
            self.n_photons,
            self.total_flux_hz,
            self.visibility,
            FringeSign::from_i8(self.fringe_sign).map_err(|e| Error::Config(e.to_string()))?,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let imperfections =
            DetectorImperfections::new(self.dark_rate_hz, self.accidental_rate_hz, "")
                .map_err(|e| Error::Config(e.to_string()))?;
        Ok(ProbeChannel {
            probe,
            imperfections,
        })
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Built-in `fig1` defaults: ideal probes N ∈ {1, 2, 4} at λ = 2×10⁶/s,
    /// V = 1, no backgrounds; f₀ = 1 kHz, T = 1 s, f_m = 20 Hz,
    /// A = 6.3×10⁻² rad, 100 averages, seed 0.
    pub fn fig1_defaults() -> Self {
        RunConfig {
            out_dir: None,
            quiet: false,
            sim: SimSection {
                duration_s: 1.0,
                bin_rate_hz: 1000.0,
                realizations: 100,
                base_seed: 0,
            },
            modulation: ModulationSection {
                frequency_hz: 20.0,
                amplitude_rad: Some(6.3e-2),
            },
            sweep: None,
            probes: [1u32, 2, 4]
                .into_iter()
                .map(|n| ProbeSection {
                    n_photons: n,
                    total_flux_hz: 2e6,
                    visibility: 1.0,
                    fringe_sign: 1,
                    dark_rate_hz: 0.0,
                    accidental_rate_hz: 0.0,
                })
                .collect(),
        }
    }

    /// Built-in `sweep` defaults modeled on the bench conditions: 80 kHz
    /// detected singles limited by 100 Hz dark counts and 40 kHz detected
    /// coincidences limited by accidentals at a coincidence-to-accidental
    /// ratio of 100, sampled at 10 kHz over 1 s, driven at 440 Hz, 100
    /// averages. Raw visibilities are back-solved so the diluted values
    /// come out at 99.3% (singles) and 97.4% (pairs).
    pub fn sweep_defaults() -> Self {
        let singles = 8e4;
        let coincidences = 4e4;
        let dark = 100.0;
        let accidental = coincidences / 100.0;
        RunConfig {
            out_dir: None,
            quiet: false,
            sim: SimSection {
                duration_s: 1.0,
                bin_rate_hz: 1e4,
                realizations: 100,
                base_seed: 0,
            },
            modulation: ModulationSection {
                frequency_hz: 440.0,
                amplitude_rad: None,
            },
            sweep: Some(SweepSection {
                volumes: (1..=10).map(|v| f64::from(v) / 10.0).collect(),
                amplitude_at_full_rad: DEFAULT_AMPLITUDE_AT_FULL_RAD,
                guard_bins: default_guard_bins(),
                threshold_sigma: default_threshold_sigma(),
            }),
            probes: vec![
                ProbeSection {
                    n_photons: 1,
                    total_flux_hz: 2.0 * singles,
                    visibility: raw_visibility_for_effective(0.993, singles, dark),
                    fringe_sign: 1,
                    dark_rate_hz: dark,
                    accidental_rate_hz: 0.0,
                },
                ProbeSection {
                    n_photons: 2,
                    total_flux_hz: 4.0 * coincidences,
                    visibility: raw_visibility_for_effective(0.974, coincidences, accidental),
                    fringe_sign: 1,
                    dark_rate_hz: 0.0,
                    accidental_rate_hz: accidental,
                },
            ],
        }
    }

    /// Applies CLI flag overrides.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        out: Option<PathBuf>,
        realizations: Option<u32>,
        quiet: bool,
    ) {
        if let Some(seed) = seed {
            self.sim.base_seed = seed;
        }
        if let Some(out) = out {
            self.out_dir = Some(out);
        }
        if let Some(m) = realizations {
            self.sim.realizations = m;
        }
        if quiet {
            self.quiet = true;
        }
    }

    pub fn simulation_config(&self) -> Result<SimulationConfig> {
        SimulationConfig::new(
            self.sim.duration_s,
            self.sim.bin_rate_hz,
            self.sim.realizations,
            self.sim.base_seed,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    fn channels(&self) -> Result<Vec<ProbeChannel>> {
        if self.probes.is_empty() {
            return Err(Error::Config("at least one [[probes]] block is required".into()));
        }
        self.probes.iter().map(|p| p.to_channel()).collect()
    }

    pub fn to_fig1_config(&self) -> Result<Fig1Config> {
        let amplitude = self.modulation.amplitude_rad.ok_or_else(|| {
            Error::Config("fig1 requires modulation.amplitude_rad".into())
        })?;
        if amplitude < 0.0 {
            return Err(Error::Config("modulation.amplitude_rad must be ≥ 0".into()));
        }
        Ok(Fig1Config {
            probes: self.channels()?,
            amplitude,
            mod_freq: self.modulation.frequency_hz,
            sim: self.simulation_config()?,
            guard_bins: self
                .sweep
                .as_ref()
                .map_or(default_guard_bins(), |s| s.guard_bins),
            threshold_sigma: self
                .sweep
                .as_ref()
                .map_or(default_threshold_sigma(), |s| s.threshold_sigma),
        })
    }

    pub fn to_sweep_config(&self) -> Result<SweepConfig> {
        let section = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("sweep requires a [sweep] section".into()))?;
        let cfg = SweepConfig {
            volumes: section.volumes.clone(),
            amplitude_at_full: section.amplitude_at_full_rad,
            probes: self.channels()?,
            mod_freq: self.modulation.frequency_hz,
            sim: self.simulation_config()?,
            guard_bins: section.guard_bins,
            threshold_sigma: section.threshold_sigma,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
