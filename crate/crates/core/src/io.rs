//! Deterministic CSV serialization for count records and spectra.
//!
//! Formats are fixed for golden-file testing:
//!
//! * Count series — `#`-prefixed metadata lines (`bin_rate_hz`,
//!   `start_time_s`, `label`, optional `seed`), then a `bin_index,count`
//!   table. Round-trips bit-exactly: metadata floats use Rust's shortest
//!   round-trip formatting and counts are integers.
//! * Spectrum — metadata (`n_averaged`, the dB reference), then
//!   `frequency_hz,psd_counts2_per_hz,psd_std,n_averaged` with every float
//!   printed at 12 significant digits. An absent `psd_std` serializes as an
//!   empty field.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sim::CountSeries;
use crate::spectral::Spectrum;

/// Formats a float with 12 significant digits (scientific notation).
/// Parsing such a string back and reformatting reproduces it byte for
/// byte, which is what keeps serialize→parse→serialize stable.
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_count_series<W: Write>(
    w: &mut W,
    series: &CountSeries,
    seed: Option<u64>,
) -> Result<()> {
    if series.label.contains('\n') || series.label.contains('\r') {
        return Err(Error::Data("count-series label must be single-line".into()));
    }
    writeln!(w, "# bin_rate_hz={}", series.bin_rate)?;
    writeln!(w, "# start_time_s={}", series.start_time)?;
    writeln!(w, "# label={}", series.label)?;
    if let Some(seed) = seed {
        writeln!(w, "# seed={seed}")?;
    }
    writeln!(w, "bin_index,count")?;
    for (i, c) in series.counts.iter().enumerate() {
        writeln!(w, "{i},{c}")?;
    }
    Ok(())
}

pub fn count_series_to_string(series: &CountSeries, seed: Option<u64>) -> Result<String> {
    let mut buf = Vec::new();
    write_count_series(&mut buf, series, seed)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Parses the count-series format, returning the record and the `seed`
/// metadata when present. Errors carry 1-based line numbers.
pub fn read_count_series<R: BufRead>(r: R) -> Result<(CountSeries, Option<u64>)> {
    let mut bin_rate: Option<f64> = None;
    let mut start_time: f64 = 0.0;
    let mut label = String::new();
    let mut seed: Option<u64> = None;
    let mut counts: Vec<u64> = Vec::new();
    let mut saw_header = false;
    let mut next_index: u64 = 0;

    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim_start();
            let (key, value) = meta
                .split_once('=')
                .ok_or_else(|| Error::Data(format!("line {lineno}: malformed metadata line")))?;
            match key {
                "bin_rate_hz" => {
                    bin_rate = Some(value.parse().map_err(|_| {
                        Error::Data(format!("line {lineno}: invalid bin_rate_hz {value:?}"))
                    })?)
                }
                "start_time_s" => {
                    start_time = value.parse().map_err(|_| {
                        Error::Data(format!("line {lineno}: invalid start_time_s {value:?}"))
                    })?
                }
                "label" => label = value.to_string(),
                "seed" => {
                    seed = Some(value.parse().map_err(|_| {
                        Error::Data(format!("line {lineno}: invalid seed {value:?}"))
                    })?)
                }
                other => {
                    return Err(Error::Data(format!(
                        "line {lineno}: unknown metadata key {other:?}"
                    )))
                }
            }
            continue;
        }
        if !saw_header {
            if line != "bin_index,count" {
                return Err(Error::Data(format!(
                    "line {lineno}: expected header 'bin_index,count', got {line:?}"
                )));
            }
            saw_header = true;
            continue;
        }
        let (idx_str, count_str) = line
            .split_once(',')
            .ok_or_else(|| Error::Data(format!("line {lineno}: expected 'bin_index,count' row")))?;
        let idx: u64 = idx_str
            .parse()
            .map_err(|_| Error::Data(format!("line {lineno}: invalid bin index {idx_str:?}")))?;
        if idx != next_index {
            return Err(Error::Data(format!(
                "line {lineno}: bin index {idx} out of order (expected {next_index})"
            )));
        }
        let count: u64 = count_str.parse().map_err(|_| {
            Error::Data(format!(
                "line {lineno}: invalid count {count_str:?} (counts are non-negative integers)"
            ))
        })?;
        counts.push(count);
        next_index += 1;
    }

    let bin_rate =
        bin_rate.ok_or_else(|| Error::Data("missing '# bin_rate_hz=' metadata".into()))?;
    if !saw_header {
        return Err(Error::Data("missing 'bin_index,count' header".into()));
    }
    let series = CountSeries::new(counts, bin_rate, start_time, label)?;
    Ok((series, seed))
}

pub fn write_spectrum<W: Write>(w: &mut W, spectrum: &Spectrum) -> Result<()> {
    writeln!(w, "# n_averaged={}", spectrum.n_averaged)?;
    writeln!(w, "# db_reference=1 count^2/Hz")?;
    writeln!(w, "frequency_hz,psd_counts2_per_hz,psd_std,n_averaged")?;
    for (j, (&f, &p)) in spectrum.frequencies.iter().zip(&spectrum.psd).enumerate() {
        let std_field = match &spectrum.psd_std {
            Some(std) => fmt_sig12(std[j]),
            None => String::new(),
        };
        writeln!(
            w,
            "{},{},{},{}",
            fmt_sig12(f),
            fmt_sig12(p),
            std_field,
            spectrum.n_averaged
        )?;
    }
    Ok(())
}

pub fn spectrum_to_string(spectrum: &Spectrum) -> Result<String> {
    let mut buf = Vec::new();
    write_spectrum(&mut buf, spectrum)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn read_spectrum<R: BufRead>(r: R) -> Result<Spectrum> {
    let mut frequencies = Vec::new();
    let mut psd = Vec::new();
    let mut psd_std: Vec<f64> = Vec::new();
    let mut any_std = false;
    let mut n_averaged: u32 = 1;
    let mut saw_header = false;

    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim_start();
            if let Some((key, value)) = meta.split_once('=') {
                if key == "n_averaged" {
                    n_averaged = value.parse().map_err(|_| {
                        Error::Data(format!("line {lineno}: invalid n_averaged {value:?}"))
                    })?;
                }
            }
            continue;
        }
        if !saw_header {
            if line != "frequency_hz,psd_counts2_per_hz,psd_std,n_averaged" {
                return Err(Error::Data(format!(
                    "line {lineno}: unexpected spectrum header {line:?}"
                )));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Data(format!(
                "line {lineno}: expected 4 fields, got {}",
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Data(format!("line {lineno}: invalid {what} {s:?}")))
        };
        frequencies.push(parse(fields[0], "frequency")?);
        psd.push(parse(fields[1], "psd")?);
        if fields[2].is_empty() {
            psd_std.push(0.0);
        } else {
            any_std = true;
            psd_std.push(parse(fields[2], "psd_std")?);
        }
    }
    if !saw_header || frequencies.len() < 2 {
        return Err(Error::Data("spectrum table missing or too short".into()));
    }
    Ok(Spectrum {
        frequencies,
        psd,
        psd_std: if any_std { Some(psd_std) } else { None },
        n_averaged,
    })
}
