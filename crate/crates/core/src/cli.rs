//! Command-line front end: experiment dispatch, CSV/JSON emission, and PSD
//! analysis of externally supplied count files.
//!
//! Exit codes: 0 success, 2 config error (also used by the argument parser),
//! 3 data error, 4 internal invariant violation.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{snr_with_threshold, DEFAULT_GUARD_BINS, DEFAULT_THRESHOLD_SIGMA};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{
    fig1_theory, volume_sweep, write_fig1_outputs, write_sweep_summary, Fig1Result, SweepResult,
};
use crate::io::read_count_series;
use crate::spectral::{db, periodogram};

#[derive(Debug, Parser)]
#[command(
    name = "noonspec",
    version,
    about = "Photon-counting interferometry simulator and spectral SNR analyzer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare probes at a fixed modulation amplitude: time traces,
    /// averaged spectra and SNR summaries for each photon number.
    Fig1(RunArgs),
    /// Sweep the drive volume and record floor/peak/SNR per probe and
    /// volume.
    Sweep(RunArgs),
    /// Compute the spectral summary of a count-series CSV file.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the configured base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default "out").
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the configured number of realizations per average.
    #[arg(long)]
    pub realizations: Option<u32>,
    /// Suppress progress and summary output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Count-series CSV file (bin_index,count with # metadata).
    pub counts_csv: PathBuf,
    /// Frequency of the expected spectral line, in Hz.
    #[arg(long)]
    pub peak_freq: f64,
    /// Bins excluded on each side of the peak in the floor estimate.
    #[arg(long, default_value_t = DEFAULT_GUARD_BINS)]
    pub guard_bins: usize,
    /// Detectability threshold in floor standard deviations.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_SIGMA)]
    pub threshold_sigma: f64,
}

/// Runs a parsed command line and maps errors onto the exit-code contract.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Fig1(args) => cmd_fig1(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Analyze(args) => cmd_analyze(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("noonspec: {e}");
            e.exit_code()
        }
    }
}

fn load_config(args: &RunArgs, defaults: fn() -> RunConfig) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => defaults(),
    };
    cfg.apply_overrides(
        args.seed,
        args.out.clone(),
        args.realizations,
        args.quiet,
    );
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Serialize)]
struct ManifestCell {
    probe_n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    volume: Option<f64>,
    first_realization_index: u64,
    realizations: u32,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    base_seed: u64,
    config: &'a RunConfig,
    cells: Vec<ManifestCell>,
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Internal(format!("manifest serialization failed: {e}")))?;
    json.push('\n');
    fs::write(dir.join("run_manifest.json"), json)?;
    Ok(())
}

fn print_fig1_summary(result: &Fig1Result) {
    for ch in &result.channels {
        let s = &ch.summary;
        println!(
            "N={}: floor {:.6e} counts^2/Hz ({:+.2} dB), peak {:.6e} ({:+.2} dB), SNR {:.2} dB, detectable: {}",
            ch.n_photons,
            s.floor,
            db(s.floor),
            s.peak,
            db(s.peak),
            s.snr_db,
            s.detectable
        );
    }
}

/// `fig1`: simulate the fixed-amplitude comparison and write
/// `fig1_timetrace.csv`, `fig1_psd.csv`, per-probe trace files and the run
/// manifest.
pub fn cmd_fig1(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args, RunConfig::fig1_defaults)?;
    let fig1 = cfg.to_fig1_config()?;
    warn_nonlinear(&cfg, fig1.amplitude);
    let result = fig1_theory(&fig1)?;
    let dir = out_dir(&cfg);
    write_fig1_outputs(&dir, &fig1, &result)?;
    let cells = result
        .channels
        .iter()
        .map(|ch| ManifestCell {
            probe_n: ch.n_photons,
            volume: None,
            first_realization_index: ch.first_realization_index,
            realizations: fig1.sim.realizations,
        })
        .collect();
    write_manifest(
        &dir,
        &RunManifest {
            command: "fig1",
            base_seed: fig1.sim.base_seed,
            config: &cfg,
            cells,
        },
    )?;
    if !cfg.quiet {
        print_fig1_summary(&result);
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn print_sweep_summary(result: &SweepResult) {
    for cell in &result.cells {
        let s = &cell.summary;
        println!(
            "N={} volume {:.3}: floor {:+.2} dB, peak {:+.2} dB, SNR {:.2} dB, detectable: {}",
            cell.probe_n,
            cell.volume,
            db(s.floor),
            db(s.peak),
            s.snr_db,
            s.detectable
        );
    }
    for diff in &result.snr_differences {
        let values: Vec<String> = diff.diff_db.iter().map(|d| format!("{d:.2}")).collect();
        println!(
            "SNR(N={}) − SNR(N={}) per volume [dB]: {}",
            diff.probe_b_n,
            diff.probe_a_n,
            values.join(", ")
        );
    }
}

/// `sweep`: run the volume sweep and write `sweep_summary.csv` plus the run
/// manifest.
pub fn cmd_sweep(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args, RunConfig::sweep_defaults)?;
    let sweep = cfg.to_sweep_config()?;
    warn_nonlinear(&cfg, sweep.amplitude_at_full);
    let result = volume_sweep(&sweep)?;
    let dir = out_dir(&cfg);
    write_sweep_summary(&dir, &result)?;
    let cells = result
        .cells
        .iter()
        .map(|cell| ManifestCell {
            probe_n: cell.probe_n,
            volume: Some(cell.volume),
            first_realization_index: cell.first_realization_index,
            realizations: sweep.sim.realizations,
        })
        .collect();
    write_manifest(
        &dir,
        &RunManifest {
            command: "sweep",
            base_seed: sweep.sim.base_seed,
            config: &cfg,
            cells,
        },
    )?;
    if !cfg.quiet {
        print_sweep_summary(&result);
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn warn_nonlinear(cfg: &RunConfig, amplitude: f64) {
    if cfg.quiet {
        return;
    }
    for p in &cfg.probes {
        if amplitude > 0.2 * p.visibility {
            eprintln!(
                "warning: amplitude {amplitude} rad exceeds the linear-regime guard (0.2×V = {}) for the N={} probe; closed-form overlays assume the linear regime",
                0.2 * p.visibility,
                p.n_photons
            );
        }
    }
}

/// `analyze`: periodogram + spectral summary of an existing count record,
/// printed as one JSON object on standard output.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let file = fs::File::open(&args.counts_csv).map_err(|e| {
        Error::Data(format!("cannot open {}: {e}", args.counts_csv.display()))
    })?;
    let (series, _seed) = read_count_series(BufReader::new(file))?;
    let spectrum = periodogram(&series)?;
    let summary = snr_with_threshold(
        &spectrum,
        args.peak_freq,
        args.guard_bins,
        args.threshold_sigma,
    )?;
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Internal(format!("summary serialization failed: {e}")))?;
    println!("{json}");
    Ok(())
}
