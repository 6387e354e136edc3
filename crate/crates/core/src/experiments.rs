//! Scripted probe comparisons: fixed-amplitude reference runs, volume
//! sweeps with repeated acquisitions, and detectability-crossover searches.
//!
//! Realization indices are allocated deterministically so that probes in
//! one run share a `base_seed` yet never share an RNG stream (emulating
//! simultaneous acquisition without artificial cross-correlation), and so
//! that any parallel schedule produces identical results:
//!
//! * probe `p` owns the index block starting at `p·2^40`;
//! * within a sweep, volume `v` uses the sub-block at `v·2^20`;
//! * crossover searches use the region above `2^32` inside the probe block,
//!   advancing by evaluation so every bisection probe sees fresh streams.
//!
//! This layout assumes at most 2^20 realizations per cell and 2^12 volumes,
//! far beyond any practical run.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{snr_with_threshold, SpectralSummary, DEFAULT_GUARD_BINS, DEFAULT_THRESHOLD_SIGMA};
use crate::error::{Error, Result};
use crate::io::fmt_sig12;
use crate::oracle::{predicted_snr, predicted_spectrum, PredictedSpectrum};
use crate::probe::{operating_point, ModulationParams, ProbeParams};
use crate::sim::{simulate_probe, CountSeries, DetectorImperfections, SimulationConfig};
use crate::spectral::{average_spectra, db, periodogram, Spectrum};

const PROBE_STRIDE: u64 = 1 << 40;
const VOLUME_STRIDE: u64 = 1 << 20;
const CROSSOVER_OFFSET: u64 = 1 << 32;

/// Batches of M-fold averages per detectability verdict in
/// [`find_crossover`]; the majority vote tames the stochastic threshold.
pub const DEFAULT_CROSSOVER_BATCHES: u32 = 8;

/// First realization index of probe `probe_idx`'s block.
pub fn probe_block_start(probe_idx: usize) -> u64 {
    probe_idx as u64 * PROBE_STRIDE
}

/// First realization index for a (probe, volume) sweep cell.
pub fn sweep_cell_start(probe_idx: usize, volume_idx: usize) -> u64 {
    probe_block_start(probe_idx) + volume_idx as u64 * VOLUME_STRIDE
}

/// One detection channel: a probe and its effective backgrounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeChannel {
    pub probe: ProbeParams,
    pub imperfections: DetectorImperfections,
}

/// Simulates `count` acquisitions of a channel starting at
/// `first_index` and returns the averaged periodogram. Realizations are
/// computed in parallel; the result is independent of the schedule.
pub fn averaged_probe_spectrum(
    channel: &ProbeChannel,
    modulation: &ModulationParams,
    sim: &SimulationConfig,
    first_index: u64,
    count: u32,
) -> Result<Spectrum> {
    let spectra: Vec<Spectrum> = (0..count as u64)
        .into_par_iter()
        .map(|r| {
            let series = simulate_probe(
                &channel.probe,
                modulation,
                &channel.imperfections,
                sim,
                first_index + r,
            )?;
            periodogram(&series)
        })
        .collect::<Result<Vec<_>>>()?;
    average_spectra(&spectra)
}

// ---------------------------------------------------------------------------
// Fixed-amplitude reference run
// ---------------------------------------------------------------------------

/// Configuration of a fixed-amplitude probe comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig1Config {
    pub probes: Vec<ProbeChannel>,
    /// Modulation amplitude in radians (shared by all probes).
    pub amplitude: f64,
    /// Modulation frequency in Hz.
    pub mod_freq: f64,
    pub sim: SimulationConfig,
    pub guard_bins: usize,
    pub threshold_sigma: f64,
}

impl Default for Fig1Config {
    /// Reference comparison: λ = 2×10⁶ /s, V = 1, f₀ = 1 kHz, f_m = 20 Hz,
    /// A = 6.3×10⁻² rad, T = 1 s, N ∈ {1, 2, 4}, 100 averages.
    fn default() -> Self {
        let probes = [1u32, 2, 4]
            .into_iter()
            .map(|n| ProbeChannel {
                probe: ProbeParams::new(n, 2e6, 1.0, Default::default())
                    .expect("default probe parameters are valid"),
                imperfections: DetectorImperfections::default(),
            })
            .collect();
        Fig1Config {
            probes,
            amplitude: 6.3e-2,
            mod_freq: 20.0,
            sim: SimulationConfig::new(1.0, 1000.0, 100, 0)
                .expect("default simulation config is valid"),
            guard_bins: DEFAULT_GUARD_BINS,
            threshold_sigma: DEFAULT_THRESHOLD_SIGMA,
        }
    }
}

/// Per-probe output of a fixed-amplitude run.
#[derive(Clone, Debug)]
pub struct Fig1Channel {
    pub n_photons: u32,
    /// One sample acquisition (the first realization of the probe block).
    pub trace: CountSeries,
    /// Averaged periodogram over all realizations.
    pub spectrum: Spectrum,
    pub summary: SpectralSummary,
    pub theory: PredictedSpectrum,
    pub first_realization_index: u64,
}

#[derive(Clone, Debug)]
pub struct Fig1Result {
    pub channels: Vec<Fig1Channel>,
}

/// Runs the probe comparison at fixed modulation amplitude: per probe, one
/// sample time trace, the M-fold averaged spectrum, its summary, and the
/// closed-form overlay.
pub fn fig1_theory(cfg: &Fig1Config) -> Result<Fig1Result> {
    if cfg.probes.is_empty() {
        return Err(Error::Config("at least one probe is required".into()));
    }
    let mut channels = Vec::with_capacity(cfg.probes.len());
    for (pi, channel) in cfg.probes.iter().enumerate() {
        let n = channel.probe.n_photons;
        let modulation = ModulationParams::new(cfg.amplitude, cfg.mod_freq, operating_point(n)?)?;
        let first = probe_block_start(pi);
        let trace = simulate_probe(
            &channel.probe,
            &modulation,
            &channel.imperfections,
            &cfg.sim,
            first,
        )?;
        let spectrum =
            averaged_probe_spectrum(channel, &modulation, &cfg.sim, first, cfg.sim.realizations)?;
        let summary =
            snr_with_threshold(&spectrum, cfg.mod_freq, cfg.guard_bins, cfg.threshold_sigma)?;
        let theory = predicted_spectrum(&channel.probe, &modulation, &cfg.sim);
        channels.push(Fig1Channel {
            n_photons: n,
            trace,
            spectrum,
            summary,
            theory,
            first_realization_index: first,
        });
    }
    Ok(Fig1Result { channels })
}

// ---------------------------------------------------------------------------
// Volume sweep
// ---------------------------------------------------------------------------

/// Configuration of a drive-volume sweep. The modulation amplitude is
/// linear in volume: `A = volume · amplitude_at_full`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Drive volumes, strictly increasing, each in (0, 1].
    pub volumes: Vec<f64>,
    /// Modulation amplitude at volume 1.0, in radians.
    pub amplitude_at_full: f64,
    pub probes: Vec<ProbeChannel>,
    /// Modulation frequency in Hz.
    pub mod_freq: f64,
    pub sim: SimulationConfig,
    pub guard_bins: usize,
    pub threshold_sigma: f64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.volumes.is_empty() {
            return Err(Error::Config("volume list must not be empty".into()));
        }
        for w in self.volumes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config(format!(
                    "volumes must be strictly increasing, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        if self
            .volumes
            .iter()
            .any(|&v| !(v > 0.0 && v <= 1.0))
        {
            return Err(Error::Config("volumes must lie in (0, 1]".into()));
        }
        if self.amplitude_at_full <= 0.0 || !self.amplitude_at_full.is_finite() {
            return Err(Error::Config(format!(
                "amplitude_at_full must be positive, got {}",
                self.amplitude_at_full
            )));
        }
        if self.probes.is_empty() {
            return Err(Error::Config("at least one probe is required".into()));
        }
        if self.volumes.len() as u64 * VOLUME_STRIDE >= CROSSOVER_OFFSET
            || u64::from(self.sim.realizations) >= VOLUME_STRIDE
        {
            return Err(Error::Config(
                "sweep exceeds the realization-index allocation (≤ 4096 volumes, ≤ 2^20 realizations)"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// One (probe, volume) cell of a sweep.
#[derive(Clone, Debug)]
pub struct SweepCell {
    pub probe_n: u32,
    pub volume: f64,
    /// volume · amplitude_at_full, radians.
    pub amplitude: f64,
    pub summary: SpectralSummary,
    pub theory: PredictedSpectrum,
    pub theory_snr_db: f64,
    pub first_realization_index: u64,
}

/// SNR difference (probe b − probe a) per volume, in dB.
#[derive(Clone, Debug)]
pub struct SnrDifference {
    pub probe_a_n: u32,
    pub probe_b_n: u32,
    pub diff_db: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// Cells ordered probe-major, volume-minor.
    pub cells: Vec<SweepCell>,
    /// Pairwise SNR differences, one entry per unordered probe pair.
    pub snr_differences: Vec<SnrDifference>,
}

impl SweepResult {
    pub fn cell(&self, probe_idx: usize, volume_idx: usize, n_volumes: usize) -> &SweepCell {
        &self.cells[probe_idx * n_volumes + volume_idx]
    }
}

/// Runs the sweep: for every (probe, volume) pair, M realizations are
/// simulated, their periodograms averaged, and floor/peak/SNR extracted;
/// SNR differences are computed per probe pair afterwards.
pub fn volume_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut cells = Vec::with_capacity(cfg.probes.len() * cfg.volumes.len());
    for (pi, channel) in cfg.probes.iter().enumerate() {
        let n = channel.probe.n_photons;
        let phi0 = operating_point(n)?;
        for (vi, &volume) in cfg.volumes.iter().enumerate() {
            let amplitude = volume * cfg.amplitude_at_full;
            let modulation = ModulationParams::new(amplitude, cfg.mod_freq, phi0)?;
            let first = sweep_cell_start(pi, vi);
            let spectrum = averaged_probe_spectrum(
                channel,
                &modulation,
                &cfg.sim,
                first,
                cfg.sim.realizations,
            )?;
            let summary =
                snr_with_threshold(&spectrum, cfg.mod_freq, cfg.guard_bins, cfg.threshold_sigma)?;
            let theory = predicted_spectrum(&channel.probe, &modulation, &cfg.sim);
            let theory_snr_db = db(predicted_snr(&channel.probe, &modulation, &cfg.sim));
            cells.push(SweepCell {
                probe_n: n,
                volume,
                amplitude,
                summary,
                theory,
                theory_snr_db,
                first_realization_index: first,
            });
        }
    }

    let nv = cfg.volumes.len();
    let mut snr_differences = Vec::new();
    for a in 0..cfg.probes.len() {
        for b in (a + 1)..cfg.probes.len() {
            let diff_db = (0..nv)
                .map(|vi| {
                    cells[b * nv + vi].summary.snr_db - cells[a * nv + vi].summary.snr_db
                })
                .collect();
            snr_differences.push(SnrDifference {
                probe_a_n: cfg.probes[a].probe.n_photons,
                probe_b_n: cfg.probes[b].probe.n_photons,
                diff_db,
            });
        }
    }
    Ok(SweepResult {
        cells,
        snr_differences,
    })
}

// ---------------------------------------------------------------------------
// Detectability crossover
// ---------------------------------------------------------------------------

/// Crossover volume together with the threshold it was decided at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Crossover {
    /// Smallest volume at which the probe's line is detectable.
    pub volume: f64,
    pub threshold_sigma: f64,
    pub batches: u32,
}

/// [`find_crossover_with_batches`] with [`DEFAULT_CROSSOVER_BATCHES`].
pub fn find_crossover(cfg: &SweepConfig, probe_idx: usize) -> Result<Crossover> {
    find_crossover_with_batches(cfg, probe_idx, DEFAULT_CROSSOVER_BATCHES)
}

/// Bisects over volume for the smallest drive at which the probe's spectral
/// line is detectable.
///
/// Detection right at threshold is a coin flip on any single M-fold
/// average, so each bisection verdict is the majority over `batches`
/// independent M-fold averages; more batches narrow the stochastic
/// transition band at the cost of proportional runtime. Errors with
/// `no crossover` when the largest volume is undetectable or the smallest
/// already detectable.
pub fn find_crossover_with_batches(
    cfg: &SweepConfig,
    probe_idx: usize,
    batches: u32,
) -> Result<Crossover> {
    cfg.validate()?;
    if batches < 1 {
        return Err(Error::InvalidArgument("batches must be at least 1".into()));
    }
    let channel = cfg
        .probes
        .get(probe_idx)
        .ok_or_else(|| Error::InvalidArgument(format!("no probe at index {probe_idx}")))?;
    let n = channel.probe.n_photons;
    let phi0 = operating_point(n)?;
    let m = u64::from(cfg.sim.realizations);
    let base = probe_block_start(probe_idx) + CROSSOVER_OFFSET;

    let detect = |volume: f64, eval: u64| -> Result<bool> {
        let amplitude = volume * cfg.amplitude_at_full;
        let modulation = ModulationParams::new(amplitude, cfg.mod_freq, phi0)?;
        let mut hits = 0u32;
        for b in 0..u64::from(batches) {
            let first = base + (eval * u64::from(batches) + b) * m;
            let spectrum = averaged_probe_spectrum(
                channel,
                &modulation,
                &cfg.sim,
                first,
                cfg.sim.realizations,
            )?;
            let summary =
                snr_with_threshold(&spectrum, cfg.mod_freq, cfg.guard_bins, cfg.threshold_sigma)?;
            if summary.detectable {
                hits += 1;
            }
        }
        Ok(2 * hits > batches)
    };

    let mut lo = cfg.volumes[0];
    let mut hi = *cfg.volumes.last().expect("validated non-empty");
    if !detect(hi, 0)? {
        return Err(Error::Data(format!(
            "no crossover in range: line not detectable at the largest volume {hi}"
        )));
    }
    if detect(lo, 1)? {
        return Err(Error::Data(format!(
            "no crossover in range: line already detectable at the smallest volume {lo}"
        )));
    }
    for step in 0..12u64 {
        let mid = 0.5 * (lo + hi);
        if detect(mid, 2 + step)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Crossover {
        volume: hi,
        threshold_sigma: cfg.threshold_sigma,
        batches,
    })
}

// ---------------------------------------------------------------------------
// Figure/summary CSV emission
// ---------------------------------------------------------------------------

/// Writes `fig1_timetrace.csv` (all probes, long format), `fig1_psd.csv`
/// (averaged spectra, long format) and one count-series file
/// `fig1_trace_n<N>.csv` per probe in the standard record format.
pub fn write_fig1_outputs(dir: &Path, cfg: &Fig1Config, result: &Fig1Result) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut trace = Vec::new();
    writeln!(trace, "# bin_rate_hz={}", cfg.sim.bin_rate)?;
    writeln!(trace, "# duration_s={}", cfg.sim.duration)?;
    writeln!(trace, "# modulation_freq_hz={}", cfg.mod_freq)?;
    writeln!(trace, "# base_seed={}", cfg.sim.base_seed)?;
    writeln!(trace, "probe_n,bin_index,count")?;
    for ch in &result.channels {
        for (i, c) in ch.trace.counts.iter().enumerate() {
            writeln!(trace, "{},{},{}", ch.n_photons, i, c)?;
        }
    }
    fs::write(dir.join("fig1_timetrace.csv"), trace)?;

    let mut psd = Vec::new();
    writeln!(psd, "# n_averaged={}", cfg.sim.realizations)?;
    writeln!(psd, "# db_reference=1 count^2/Hz")?;
    writeln!(psd, "probe_n,frequency_hz,psd_counts2_per_hz,psd_std")?;
    for ch in &result.channels {
        let std = ch.spectrum.psd_std.as_deref();
        for (j, (&f, &p)) in ch
            .spectrum
            .frequencies
            .iter()
            .zip(&ch.spectrum.psd)
            .enumerate()
        {
            let std_field = std.map(|s| fmt_sig12(s[j])).unwrap_or_default();
            writeln!(
                psd,
                "{},{},{},{}",
                ch.n_photons,
                fmt_sig12(f),
                fmt_sig12(p),
                std_field
            )?;
        }
    }
    fs::write(dir.join("fig1_psd.csv"), psd)?;

    for ch in &result.channels {
        let mut buf = Vec::new();
        crate::io::write_count_series(
            &mut buf,
            &ch.trace,
            Some(crate::sim::stream_seed(
                cfg.sim.base_seed,
                ch.first_realization_index,
            )),
        )?;
        fs::write(dir.join(format!("fig1_trace_n{}.csv", ch.n_photons)), buf)?;

        let mut buf = Vec::new();
        crate::io::write_spectrum(&mut buf, &ch.spectrum)?;
        fs::write(dir.join(format!("fig1_spectrum_n{}.csv", ch.n_photons)), buf)?;
    }
    Ok(())
}

/// Writes `sweep_summary.csv` with one row per (probe, volume) cell.
pub fn write_sweep_summary(dir: &Path, result: &SweepResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    writeln!(
        out,
        "probe_n,volume,floor,floor_std,peak,snr_db,theory_floor,theory_peak,theory_snr_db,detectable"
    )?;
    for cell in &result.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            cell.probe_n,
            fmt_sig12(cell.volume),
            fmt_sig12(cell.summary.floor),
            fmt_sig12(cell.summary.floor_std),
            fmt_sig12(cell.summary.peak),
            fmt_sig12(cell.summary.snr_db),
            fmt_sig12(cell.theory.floor),
            fmt_sig12(cell.theory.peak_value),
            fmt_sig12(cell.theory_snr_db),
            cell.summary.detectable
        )?;
    }
    fs::write(dir.join("sweep_summary.csv"), out)?;
    Ok(())
}
