//! End-to-end acceptance suite.
//!
//! Each numbered check prints one PASS/FAIL line with the measured values;
//! the test fails if any check fails. Run with
//! `cargo test -p noonspec --test acceptance -- --nocapture` to see the
//! lines on success too. Every tolerance and runtime budget is pinned in
//! the constants below.

use std::time::Instant;

use noonspec::config::RunConfig;
use noonspec::experiments::{
    fig1_theory, find_crossover_with_batches, volume_sweep, write_sweep_summary, Fig1Config,
    Fig1Result, ProbeChannel, SweepConfig,
};
use noonspec::io::count_series_to_string;
use noonspec::oracle::{predicted_snr, predicted_spectrum};
use noonspec::probe::{operating_point, ModulationParams, ProbeParams};
use noonspec::sim::{empirical_autocorrelation, simulate_counts, SimulationConfig};
use noonspec::spectral::{db, periodogram, shot_noise_level};

// Check 1: homogeneous shot-noise floor.
const FLOOR_REL_TOL: f64 = 0.02;
const FLATNESS_SIGMA: f64 = 3.0;
const CHECK1_BUDGET_S: f64 = 5.0;
// Check 2: autocorrelation whiteness.
const ACF0_REL_TOL: f64 = 0.05;
const ACF_LAG_SIGMA: f64 = 5.0;
// Check 3: fixed-amplitude comparison.
const PEAK_DB: f64 = 29.97;
const PEAK_DB_TOL: f64 = 0.5;
const FLOOR_DB_TOL: f64 = 0.15;
const PEAK_PAIRWISE_DB_TOL: f64 = 0.5;
const CHECK3_BUDGET_S: f64 = 30.0;
// Check 4: SNR scaling with photon number.
const SNR_SCALING_REL_TOL: f64 = 0.10;
// Check 5: 3 dB gain under bench conditions.
const FLOOR_SEPARATION_DB: f64 = 3.0;
const FLOOR_SEPARATION_DB_TOL: f64 = 0.2;
const SNR_DIFF_DB_TOL: f64 = 0.3;
const CHECK5_BUDGET_S: f64 = 120.0;
// Check 6: sub-shot-noise band.
const CHECK6_BUDGET_S: f64 = 600.0;
// Check 7: algebraic and numeric identities.
const ORACLE_IDENTITY_REL_TOL: f64 = 1e-12;
const PARSEVAL_REL_TOL: f64 = 1e-9;
// Check 8: crossover ordering.
const CROSSOVER_RATIO_REL_TOL: f64 = 0.15;

type CheckResult = Result<String, String>;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Least-squares slope of y on x with its standard error from residuals.
fn slope_with_se(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let se = (ss_res / (x.len() as f64 - 2.0) / sxx).sqrt();
    (slope, se)
}

/// 100 homogeneous realizations shared by checks 1 and 2.
fn homogeneous_ensemble() -> Vec<noonspec::sim::CountSeries> {
    let cfg = SimulationConfig::new(1.0, 1000.0, 100, 1001).unwrap();
    (0..100)
        .map(|r| simulate_counts(|_| 2e6, &cfg, r).unwrap())
        .collect()
}

fn check1_shot_noise_floor() -> CheckResult {
    let start = Instant::now();
    let ensemble = homogeneous_ensemble();
    let spectra: Vec<_> = ensemble.iter().map(|s| periodogram(s).unwrap()).collect();
    let avg = noonspec::spectral::average_spectra(&spectra).unwrap();

    let expected = shot_noise_level(2e6, 1000.0);
    let floor = mean(&avg.psd[1..]);
    let rel = (floor - expected).abs() / expected;

    let (slope, slope_se) = slope_with_se(&avg.frequencies[1..], &avg.psd[1..]);
    let z = slope / slope_se;
    let elapsed = start.elapsed().as_secs_f64();

    if rel > FLOOR_REL_TOL {
        return Err(format!(
            "floor {floor:.4} vs {expected:.4} counts²/Hz, rel err {:.3}% > {:.0}%",
            rel * 100.0,
            FLOOR_REL_TOL * 100.0
        ));
    }
    if z.abs() > FLATNESS_SIGMA {
        return Err(format!("flatness slope z = {z:.2} beyond ±{FLATNESS_SIGMA}"));
    }
    if elapsed > CHECK1_BUDGET_S {
        return Err(format!("runtime {elapsed:.1} s over the {CHECK1_BUDGET_S} s budget"));
    }
    Ok(format!(
        "floor {floor:.4} counts²/Hz (target {expected:.2} ± {:.0}%), slope z {z:+.2}, {elapsed:.2} s",
        FLOOR_REL_TOL * 100.0
    ))
}

fn check2_autocorrelation_whiteness() -> CheckResult {
    let ensemble = homogeneous_ensemble();
    let max_lag = 50;
    let acfs: Vec<Vec<f64>> = ensemble
        .iter()
        .map(|s| empirical_autocorrelation(s, max_lag).unwrap())
        .collect();
    let m = acfs.len() as f64;

    let expected = 2000.0; // λ·Δt
    let lag_mean: Vec<f64> = (0..=max_lag)
        .map(|j| acfs.iter().map(|a| a[j]).sum::<f64>() / m)
        .collect();
    let rel0 = (lag_mean[0] - expected).abs() / expected;
    if rel0 > ACF0_REL_TOL {
        return Err(format!(
            "R[0] = {:.1} vs {expected} counts², rel err {:.2}% > {:.0}%",
            lag_mean[0],
            rel0 * 100.0,
            ACF0_REL_TOL * 100.0
        ));
    }
    let mut worst_z: f64 = 0.0;
    for j in 1..=max_lag {
        let var = acfs.iter().map(|a| (a[j] - lag_mean[j]).powi(2)).sum::<f64>() / (m - 1.0);
        let se = (var / m).sqrt();
        let z = lag_mean[j] / se;
        worst_z = worst_z.max(z.abs());
        if z.abs() > ACF_LAG_SIGMA {
            return Err(format!(
                "lag {j}: mean R = {:.2} is {z:.1} standard errors from zero (limit {ACF_LAG_SIGMA})",
                lag_mean[j]
            ));
        }
    }
    Ok(format!(
        "R[0] = {:.1} counts² (target {expected} ± {:.0}%), lags 1..{max_lag} white, worst |z| {worst_z:.2}",
        lag_mean[0],
        ACF0_REL_TOL * 100.0
    ))
}

fn reference_comparison() -> Fig1Result {
    let mut cfg = Fig1Config::default();
    cfg.sim = cfg.sim.with_base_seed(1003);
    fig1_theory(&cfg).unwrap()
}

fn check3_reference_figure(result: &Fig1Result, elapsed: f64) -> CheckResult {
    let expected_floor_db = [0.0, -3.010_299_956_639_812, -6.020_599_913_279_624];
    let mut peaks_db = Vec::new();
    for (ch, &floor_exp) in result.channels.iter().zip(&expected_floor_db) {
        let peak_db = db(ch.summary.peak);
        let floor_db = db(ch.summary.floor);
        if (peak_db - PEAK_DB).abs() > PEAK_DB_TOL {
            return Err(format!(
                "N={}: peak {peak_db:.3} dB vs {PEAK_DB} ± {PEAK_DB_TOL} dB",
                ch.n_photons
            ));
        }
        if (floor_db - floor_exp).abs() > FLOOR_DB_TOL {
            return Err(format!(
                "N={}: floor {floor_db:.3} dB vs {floor_exp:.2} ± {FLOOR_DB_TOL} dB",
                ch.n_photons
            ));
        }
        peaks_db.push(peak_db);
    }
    for i in 0..peaks_db.len() {
        for j in (i + 1)..peaks_db.len() {
            if (peaks_db[i] - peaks_db[j]).abs() > PEAK_PAIRWISE_DB_TOL {
                return Err(format!(
                    "peaks differ by {:.3} dB between channels {i} and {j}",
                    (peaks_db[i] - peaks_db[j]).abs()
                ));
            }
        }
    }
    // The energy-normalized floor is the same for every probe:
    // floor(N)·N constant to 3%.
    let scaled: Vec<f64> = result
        .channels
        .iter()
        .map(|ch| ch.summary.floor * f64::from(ch.n_photons))
        .collect();
    let spread = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        / scaled.iter().cloned().fold(f64::INFINITY, f64::min)
        - 1.0;
    if spread > 0.03 {
        return Err(format!(
            "floor·N varies by {:.2}% across probes (limit 3%)",
            spread * 100.0
        ));
    }
    if elapsed > CHECK3_BUDGET_S {
        return Err(format!("runtime {elapsed:.1} s over the {CHECK3_BUDGET_S} s budget"));
    }
    let floors: Vec<String> = result
        .channels
        .iter()
        .map(|ch| format!("{:+.3}", db(ch.summary.floor)))
        .collect();
    Ok(format!(
        "peaks {} dB (target {PEAK_DB} ± {PEAK_DB_TOL}), floors {} dB, {elapsed:.1} s",
        peaks_db
            .iter()
            .map(|p| format!("{p:.2}"))
            .collect::<Vec<_>>()
            .join("/"),
        floors.join("/")
    ))
}

fn check4_snr_scaling(result: &Fig1Result) -> CheckResult {
    let snr1 = result.channels[0].summary.snr;
    let mut report = Vec::new();
    for ch in &result.channels[1..] {
        let ratio = ch.summary.snr / snr1;
        let n = f64::from(ch.n_photons);
        let rel = (ratio / n - 1.0).abs();
        if rel > SNR_SCALING_REL_TOL {
            return Err(format!(
                "SNR(N={})/SNR(1) = {ratio:.3} deviates {:.1}% from {n} (limit {:.0}%)",
                ch.n_photons,
                rel * 100.0,
                SNR_SCALING_REL_TOL * 100.0
            ));
        }
        report.push(format!("N={}: {ratio:.3}", ch.n_photons));
    }
    Ok(format!(
        "SNR ratios {} (targets N ± {:.0}%)",
        report.join(", "),
        SNR_SCALING_REL_TOL * 100.0
    ))
}

/// Bench-condition sweep configuration shared by checks 5 and 6: 80 kHz
/// singles (dark 100 Hz) vs 40 kHz coincidences (accidentals 400 Hz),
/// diluted visibilities 99.3%/97.4%, 10 kHz sampling, 1 s window, 440 Hz
/// drive, full-scale amplitude 0.12 rad.
fn bench_sweep(volumes: Vec<f64>, realizations: u32, seed: u64) -> SweepConfig {
    let mut cfg = RunConfig::sweep_defaults().to_sweep_config().unwrap();
    cfg.volumes = volumes;
    cfg.amplitude_at_full = 0.12;
    cfg.sim.realizations = realizations;
    cfg.sim = cfg.sim.with_base_seed(seed);
    cfg
}

fn check5_bench_3db_gain() -> CheckResult {
    let start = Instant::now();
    let cfg = bench_sweep(vec![0.6, 0.7, 0.8, 0.9, 1.0], 100, 1005);
    let result = volume_sweep(&cfg).unwrap();
    let nv = cfg.volumes.len();

    // Predicted SNR gain once both effective visibilities are accounted
    // for: 3.0 − 10·log₁₀(V₁²/V₂²) with V₁ = 0.993, V₂ = 0.974.
    let expected_diff = 3.0 - 10.0 * ((0.993f64 / 0.974).powi(2)).log10();

    let mut floor_seps = Vec::new();
    let mut diffs = Vec::new();
    for vi in 0..nv {
        let c1 = result.cell(0, vi, nv);
        let c2 = result.cell(1, vi, nv);
        let sep = db(c1.summary.floor) - db(c2.summary.floor);
        if (sep - FLOOR_SEPARATION_DB).abs() > FLOOR_SEPARATION_DB_TOL {
            return Err(format!(
                "volume {}: floor separation {sep:.3} dB vs {FLOOR_SEPARATION_DB} ± {FLOOR_SEPARATION_DB_TOL} dB",
                c1.volume
            ));
        }
        let diff = result.snr_differences[0].diff_db[vi];
        if (diff - expected_diff).abs() > SNR_DIFF_DB_TOL {
            return Err(format!(
                "volume {}: SNR difference {diff:.3} dB vs {expected_diff:.3} ± {SNR_DIFF_DB_TOL} dB",
                c1.volume
            ));
        }
        floor_seps.push(sep);
        diffs.push(diff);
    }
    // At the highest volume the two lines have the same height.
    let last = nv - 1;
    let peak_gap =
        (db(result.cell(0, last, nv).summary.peak) - db(result.cell(1, last, nv).summary.peak)).abs();
    if peak_gap > 0.5 {
        return Err(format!("peak heights differ by {peak_gap:.3} dB at full volume"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed > CHECK5_BUDGET_S {
        return Err(format!("runtime {elapsed:.1} s over the {CHECK5_BUDGET_S} s budget"));
    }
    Ok(format!(
        "floor separation {:.2}–{:.2} dB (target {FLOOR_SEPARATION_DB} ± {FLOOR_SEPARATION_DB_TOL}), SNR diff {:.2}–{:.2} dB (target {expected_diff:.2} ± {SNR_DIFF_DB_TOL}), peak gap {peak_gap:.2} dB, {elapsed:.1} s",
        floor_seps.iter().cloned().fold(f64::INFINITY, f64::min),
        floor_seps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        diffs.iter().cloned().fold(f64::INFINITY, f64::min),
        diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    ))
}

fn check6_sub_shot_noise_band() -> CheckResult {
    let start = Instant::now();
    // Low-volume band of the same bench configuration, 1000 averages. The
    // single-photon line must vanish while the two-photon line survives.
    let cfg = bench_sweep(vec![0.0135, 0.015, 0.0162, 0.0175], 1000, 1006);
    let result = volume_sweep(&cfg).unwrap();
    let nv = cfg.volumes.len();

    let mut witness = None;
    let mut verdicts = Vec::new();
    for vi in 0..nv {
        let d1 = result.cell(0, vi, nv).summary.detectable;
        let d2 = result.cell(1, vi, nv).summary.detectable;
        verdicts.push(format!("v={}: N1={d1} N2={d2}", cfg.volumes[vi]));
        if !d1 && d2 && witness.is_none() {
            witness = Some(cfg.volumes[vi]);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let Some(v) = witness else {
        return Err(format!(
            "no volume with N=1 undetectable and N=2 detectable; verdicts: {}",
            verdicts.join("; ")
        ));
    };
    if elapsed > CHECK6_BUDGET_S {
        return Err(format!("runtime {elapsed:.1} s over the {CHECK6_BUDGET_S} s budget"));
    }
    Ok(format!(
        "sub-shot-noise witness at volume {v} (N=1 lost, N=2 resolved at 3σ, M=1000), {elapsed:.1} s"
    ))
}

fn check7_identities_and_determinism() -> CheckResult {
    // Closed-form identity: peak/floor equals the predicted SNR exactly.
    let settings = [
        (1u32, 2e6, 1.0, 0.063, 1.0, 1000.0),
        (2, 2e6, 1.0, 0.063, 1.0, 1000.0),
        (4, 2e6, 1.0, 0.063, 1.0, 1000.0),
        (1, 1.6e5, 0.99424125, 0.084, 1.0, 1e4),
        (2, 1.6e5, 0.98374, 0.084, 1.0, 1e4),
    ];
    for (n, flux, vis, amp, t, f0) in settings {
        let p = ProbeParams::new(n, flux, vis, Default::default()).unwrap();
        let m = ModulationParams::new(amp, 20.0, operating_point(n).unwrap()).unwrap();
        let c = SimulationConfig::new(t, f0, 1, 0).unwrap();
        let pred = predicted_spectrum(&p, &m, &c);
        let ratio = pred.peak_value / pred.floor;
        let snr = predicted_snr(&p, &m, &c);
        if (ratio - snr).abs() > ORACLE_IDENTITY_REL_TOL * snr {
            return Err(format!(
                "N={n}: |peak/floor − snr|/snr = {:.2e} > {ORACLE_IDENTITY_REL_TOL:.0e}",
                (ratio - snr).abs() / snr
            ));
        }
    }

    // Parseval: two-sided periodogram × resolution bandwidth = mean square.
    let sim = SimulationConfig::new(1.0, 1000.0, 1, 1007).unwrap();
    let series = simulate_counts(|_| 2e6, &sim, 0).unwrap();
    let spec = periodogram(&series).unwrap();
    let k = series.len();
    let last = spec.len() - 1;
    let mut two_sided = spec.psd[0] + spec.psd[last] + 2.0 * spec.psd[1..last].iter().sum::<f64>();
    two_sided *= spec.resolution();
    let mean_square = series.counts.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / k as f64;
    let parseval_rel = (two_sided - mean_square).abs() / mean_square;
    if parseval_rel > PARSEVAL_REL_TOL {
        return Err(format!(
            "Parseval residual {parseval_rel:.2e} > {PARSEVAL_REL_TOL:.0e}"
        ));
    }

    // Determinism: identical seeds reproduce identical bytes.
    let series2 = simulate_counts(|_| 2e6, &sim, 0).unwrap();
    if count_series_to_string(&series, Some(0)).unwrap()
        != count_series_to_string(&series2, Some(0)).unwrap()
    {
        return Err("identical (seed, index) produced different count records".into());
    }
    let sweep_cfg = bench_sweep(vec![0.5, 1.0], 5, 1008);
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&d1, &d2] {
        let result = volume_sweep(&sweep_cfg).unwrap();
        write_sweep_summary(d, &result).unwrap();
    }
    let b1 = std::fs::read(d1.join("sweep_summary.csv")).unwrap();
    let b2 = std::fs::read(d2.join("sweep_summary.csv")).unwrap();
    if b1 != b2 {
        return Err("rerun of the same sweep produced different bytes".into());
    }

    Ok(format!(
        "oracle identities ≤ {ORACLE_IDENTITY_REL_TOL:.0e}, Parseval residual {parseval_rel:.1e} ≤ {PARSEVAL_REL_TOL:.0e}, reruns byte-identical"
    ))
}

fn check8_crossover_ordering() -> CheckResult {
    let start = Instant::now();
    // Ideal probes (V = 1, no background) at equal energy: the two-photon
    // floor sits exactly 3 dB lower, so the detectability threshold moves
    // down by √2 in amplitude.
    let probes = [1u32, 2]
        .into_iter()
        .map(|n| ProbeChannel {
            probe: ProbeParams::new(n, 2e6, 1.0, Default::default()).unwrap(),
            imperfections: Default::default(),
        })
        .collect();
    let cfg = SweepConfig {
        volumes: vec![0.005, 0.08],
        amplitude_at_full: 6.3e-2,
        probes,
        mod_freq: 20.0,
        sim: SimulationConfig::new(1.0, 1000.0, 100, 1009).unwrap(),
        guard_bins: 2,
        threshold_sigma: 3.0,
    };
    let c1 = find_crossover_with_batches(&cfg, 0, 24).map_err(|e| e.to_string())?;
    let c2 = find_crossover_with_batches(&cfg, 1, 24).map_err(|e| e.to_string())?;
    let ratio = c2.volume / c1.volume;
    let rel = (ratio * 2f64.sqrt() - 1.0).abs();
    let elapsed = start.elapsed().as_secs_f64();
    if rel > CROSSOVER_RATIO_REL_TOL {
        return Err(format!(
            "crossover(2)/crossover(1) = {ratio:.4} deviates {:.1}% from 1/√2 (limit {:.0}%)",
            rel * 100.0,
            CROSSOVER_RATIO_REL_TOL * 100.0
        ));
    }
    Ok(format!(
        "crossovers {:.4} (N=1) / {:.4} (N=2), ratio {ratio:.4} vs 1/√2 = {:.4} ± {:.0}%, {elapsed:.1} s",
        c1.volume,
        c2.volume,
        std::f64::consts::FRAC_1_SQRT_2,
        CROSSOVER_RATIO_REL_TOL * 100.0
    ))
}

#[test]
fn acceptance_suite() {
    let fig1_start = Instant::now();
    let fig1 = reference_comparison();
    let fig1_elapsed = fig1_start.elapsed().as_secs_f64();

    let checks: Vec<(&str, CheckResult)> = vec![
        ("1 shot-noise floor", check1_shot_noise_floor()),
        ("2 autocorrelation whiteness", check2_autocorrelation_whiteness()),
        ("3 fixed-amplitude comparison", check3_reference_figure(&fig1, fig1_elapsed)),
        ("4 SNR scaling with N", check4_snr_scaling(&fig1)),
        ("5 bench-condition 3 dB gain", check5_bench_3db_gain()),
        ("6 sub-shot-noise band", check6_sub_shot_noise_band()),
        ("7 identities and determinism", check7_identities_and_determinism()),
        ("8 crossover ordering", check8_crossover_ordering()),
    ];

    let mut failures = 0;
    for (name, outcome) in &checks {
        match outcome {
            Ok(detail) => println!("acceptance {name}: PASS ({detail})"),
            Err(detail) => {
                failures += 1;
                println!("acceptance {name}: FAIL ({detail})");
            }
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance check(s) failed");
}
