//! Offline pre-processing from correlator accumulation logs and power
//! telemetry to observation streams.
//!
//! The pipeline mirrors what a software receiver produces: high-rate complex
//! accumulations over a tap grid and a lower-rate band-power history. From
//! those it estimates the interference-free noise deviation `σ_N0` on
//! signal-free outer taps, averages accumulation blocks down to the
//! detector's epoch rate, interpolates power onto those epochs, excises
//! intermittent interference by the knee of the empirical power CDF, and
//! emits `(D, P)` observations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observables::Observation;

/// Bin width (dB) for the empirical power CDF used in excision.
const CDF_BIN_DB: f64 = 0.05;

/// Moving-average window (bins) smoothing the CDF second difference.
const CDF_SMOOTH_BINS: usize = 5;

/// Epochs adjacent to an excised epoch are excised too, this far out.
const EXCISE_DILATION: usize = 2;

/// One time-stamped complex accumulation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumRecord {
    pub t_s: f64,
    pub values: Vec<Complex64>,
}

/// A correlator accumulation log for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationLog {
    pub channel: usize,
    pub rate_hz: f64,
    /// Lag offsets (chips), strictly increasing, uniformly spaced, with 0.
    pub taps: Vec<f64>,
    pub records: Vec<AccumRecord>,
}

/// A band-power telemetry log.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLog {
    pub rate_hz: f64,
    pub w_p_hz: f64,
    /// Time-stamped band power (dBW), strictly increasing timestamps.
    pub records: Vec<(f64, f64)>,
}

impl AccumulationLog {
    /// Structural checks: uniform taps including zero, strictly increasing
    /// timestamps within ±1% of the nominal rate.
    pub fn validate(&self) -> Result<()> {
        if self.taps.len() < 3 {
            return Err(Error::InvalidParameter("need at least 3 taps".into()));
        }
        if !(self.rate_hz > 0.0) {
            return Err(Error::InvalidParameter("rate must be positive".into()));
        }
        let spacing = self.taps[1] - self.taps[0];
        for w in self.taps.windows(2) {
            if w[1] <= w[0] || ((w[1] - w[0]) - spacing).abs() > 1e-9 {
                return Err(Error::InvalidParameter(
                    "taps must be strictly increasing and uniformly spaced".into(),
                ));
            }
        }
        if !self.taps.iter().any(|&t| t.abs() < 1e-9) {
            return Err(Error::InvalidParameter("tap grid must include 0".into()));
        }
        let nominal = 1.0 / self.rate_hz;
        for w in self.records.windows(2) {
            let dt = w[1].t_s - w[0].t_s;
            if dt <= 0.0 || (dt - nominal).abs() > 0.01 * nominal {
                return Err(Error::InvalidParameter(format!(
                    "timestamps must increase at {} Hz within 1%, got dt={dt}",
                    self.rate_hz
                )));
            }
        }
        for r in &self.records {
            if r.values.len() != self.taps.len() {
                return Err(Error::InvalidParameter(
                    "record length does not match tap count".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn tap_index(&self, lag: f64) -> Option<usize> {
        self.taps.iter().position(|&t| (t - lag).abs() < 1e-9)
    }
}

/// Writes the `PDACCUM v1` text format: a header, the tap-offset line, then
/// one line per epoch of `t` followed by `re:im` pairs.
pub fn write_accum_log<W: std::io::Write>(w: &mut W, log: &AccumulationLog) -> Result<()> {
    writeln!(
        w,
        "PDACCUM v1 {} {} {}",
        log.channel,
        log.rate_hz,
        log.taps.len()
    )?;
    let taps: Vec<String> = log.taps.iter().map(|t| t.to_string()).collect();
    writeln!(w, "{}", taps.join(" "))?;
    for r in &log.records {
        let mut line = r.t_s.to_string();
        for v in &r.values {
            line.push(' ');
            line.push_str(&format!("{}:{}", v.re, v.im));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_accum_log<R: std::io::BufRead>(r: R, path: &str) -> Result<AccumulationLog> {
    let mut lines = r.lines().enumerate();
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    let (_, header) = lines
        .next()
        .ok_or_else(|| perr(1, "empty file".into()))?
        .1
        .map(|h| (0usize, h))
        .map_err(Error::Io)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "PDACCUM" {
        return Err(perr(1, format!("bad header {header:?}")));
    }
    if fields[1] != "v1" {
        return Err(Error::Version {
            expected: "PDACCUM v1".into(),
            found: format!("{} {}", fields[0], fields[1]),
        });
    }
    let channel: usize = fields[2]
        .parse()
        .map_err(|e| perr(1, format!("channel: {e}")))?;
    let rate_hz: f64 = fields[3]
        .parse()
        .map_err(|e| perr(1, format!("rate: {e}")))?;
    let n_taps: usize = fields[4]
        .parse()
        .map_err(|e| perr(1, format!("tap count: {e}")))?;

    let (_, tap_line) = lines
        .next()
        .ok_or_else(|| perr(2, "missing tap line".into()))?;
    let tap_line = tap_line?;
    let taps: Vec<f64> = tap_line
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| perr(2, format!("tap offsets: {e}")))?;
    if taps.len() != n_taps {
        return Err(perr(
            2,
            format!("expected {n_taps} taps, got {}", taps.len()),
        ));
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let t_s: f64 = parts
            .next()
            .unwrap()
            .parse()
            .map_err(|e| perr(lineno, format!("timestamp: {e}")))?;
        let mut values = Vec::with_capacity(n_taps);
        for part in parts {
            let (re, im) = part
                .split_once(':')
                .ok_or_else(|| perr(lineno, format!("expected re:im pair, got {part:?}")))?;
            let re: f64 = re
                .parse()
                .map_err(|e| perr(lineno, format!("real part: {e}")))?;
            let im: f64 = im
                .parse()
                .map_err(|e| perr(lineno, format!("imag part: {e}")))?;
            values.push(Complex64::new(re, im));
        }
        if values.len() != n_taps {
            return Err(perr(
                lineno,
                format!("expected {n_taps} accumulations, got {}", values.len()),
            ));
        }
        records.push(AccumRecord { t_s, values });
    }
    let log = AccumulationLog {
        channel,
        rate_hz,
        taps,
        records,
    };
    log.validate()?;
    Ok(log)
}

/// Writes the `PDPOWER v1` text format.
pub fn write_power_log<W: std::io::Write>(w: &mut W, log: &PowerLog) -> Result<()> {
    writeln!(w, "PDPOWER v1 {} {}", log.rate_hz, log.w_p_hz)?;
    for (t, p) in &log.records {
        writeln!(w, "{t} {p}")?;
    }
    Ok(())
}

pub fn read_power_log<R: std::io::BufRead>(r: R, path: &str) -> Result<PowerLog> {
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    let mut lines = r.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| perr(1, "empty file".into()))?
        .1?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "PDPOWER" {
        return Err(perr(1, format!("bad header {header:?}")));
    }
    if fields[1] != "v1" {
        return Err(Error::Version {
            expected: "PDPOWER v1".into(),
            found: format!("{} {}", fields[0], fields[1]),
        });
    }
    let rate_hz: f64 = fields[2]
        .parse()
        .map_err(|e| perr(1, format!("rate: {e}")))?;
    let w_p_hz: f64 = fields[3]
        .parse()
        .map_err(|e| perr(1, format!("bandwidth: {e}")))?;
    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (t, p) = line
            .trim()
            .split_once(' ')
            .ok_or_else(|| perr(lineno, "expected `t value` pair".into()))?;
        let t: f64 = t
            .parse()
            .map_err(|e| perr(lineno, format!("timestamp: {e}")))?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|e| perr(lineno, format!("power: {e}")))?;
        if let Some(&(prev, _)) = records.last() {
            if t <= prev {
                return Err(perr(
                    lineno,
                    "timestamps must be strictly increasing".into(),
                ));
            }
        }
        records.push((t, p));
    }
    Ok(PowerLog {
        rate_hz,
        w_p_hz,
        records,
    })
}

/// Estimates the interference-free per-component noise deviation from
/// signal-free taps (at least one chip from the prompt peak) over a quiet
/// window of at least 10 seconds.
///
/// The window is rejected if the pooled samples carry a significant mean
/// (signal leakage into the outer taps) or if the noise level shifts
/// between the window halves (interference onset).
pub fn estimate_sigma_n0(log: &AccumulationLog, window: (f64, f64)) -> Result<f64> {
    let (t0, t1) = window;
    if t1 - t0 < 10.0 {
        return Err(Error::InvalidParameter(format!(
            "quiet window must span at least 10 s, got {}",
            t1 - t0
        )));
    }
    let outer: Vec<usize> = (0..log.taps.len())
        .filter(|&i| log.taps[i].abs() >= 1.0 - 1e-9)
        .collect();
    if outer.is_empty() {
        return Err(Error::InvalidParameter(
            "no signal-free taps (|lag| >= 1 chip) in the grid".into(),
        ));
    }
    let mut first = Vec::new();
    let mut second = Vec::new();
    let mid = 0.5 * (t0 + t1);
    for r in &log.records {
        if r.t_s < t0 || r.t_s > t1 {
            continue;
        }
        let dst = if r.t_s < mid { &mut first } else { &mut second };
        for &i in &outer {
            dst.push(r.values[i].re);
            dst.push(r.values[i].im);
        }
    }
    let n = first.len() + second.len();
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "window contains too few samples ({n}) for a noise estimate"
        )));
    }
    let std_of = |v: &[f64]| -> (f64, f64) {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() as f64 - 1.0);
        (mean, var.sqrt())
    };
    let (_, s1) = std_of(&first);
    let (_, s2) = std_of(&second);
    let all: Vec<f64> = first.iter().chain(second.iter()).copied().collect();
    let (mean, sigma) = std_of(&all);

    if sigma > 0.0 {
        if mean.abs() > 4.0 * sigma / (n as f64).sqrt() {
            return Err(Error::Mismatch(
                "quiet window rejected: outer taps carry a significant mean".into(),
            ));
        }
        let ratio = if s2 > 0.0 { s1 / s2 } else { f64::INFINITY };
        if !(0.75..=1.0 / 0.75).contains(&ratio) {
            return Err(Error::Mismatch(format!(
                "quiet window rejected: noise level shifts across halves (ratio {ratio:.3})"
            )));
        }
    }
    Ok(sigma)
}

/// Averages blocks of `factor` records into one, dropping a trailing
/// partial block with a warning. Block timestamps are the block means.
pub fn decimate(log: &AccumulationLog, factor: usize) -> Result<AccumulationLog> {
    if factor == 0 {
        return Err(Error::InvalidParameter(
            "decimation factor must be >= 1".into(),
        ));
    }
    let n_blocks = log.records.len() / factor;
    if !log.records.len().is_multiple_of(factor) {
        log::warn!(
            "dropping trailing partial block of {} records",
            log.records.len() % factor
        );
    }
    let n_taps = log.taps.len();
    let mut records = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let chunk = &log.records[b * factor..(b + 1) * factor];
        let mut t = 0.0;
        let mut values = vec![Complex64::new(0.0, 0.0); n_taps];
        for r in chunk {
            t += r.t_s;
            for (acc, v) in values.iter_mut().zip(&r.values) {
                *acc += v;
            }
        }
        let scale = 1.0 / factor as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
        records.push(AccumRecord {
            t_s: t * scale,
            values,
        });
    }
    Ok(AccumulationLog {
        channel: log.channel,
        rate_hz: log.rate_hz / factor as f64,
        taps: log.taps.clone(),
        records,
    })
}

/// Linearly interpolates the power log (in dB) onto the given epochs.
/// Epochs outside the log's time span are flagged invalid (`None`).
pub fn align_power(power: &PowerLog, accum_times: &[f64]) -> Result<Vec<Option<f64>>> {
    if power.records.is_empty() {
        return Err(Error::InvalidParameter("power log is empty".into()));
    }
    let first = power.records[0].0;
    let last = power.records[power.records.len() - 1].0;
    let mut any = false;
    let out: Vec<Option<f64>> = accum_times
        .iter()
        .map(|&t| {
            // Round-off guard at the span edges.
            if t < first - 1e-9 || t > last + 1e-9 {
                return None;
            }
            let t = t.clamp(first, last);
            any = true;
            let pos = power.records.partition_point(|&(pt, _)| pt <= t);
            if pos == 0 {
                return Some(power.records[0].1);
            }
            let (t0, p0) = power.records[pos - 1];
            if pos == power.records.len() || (t - t0).abs() < 1e-12 {
                return Some(p0);
            }
            let (t1, p1) = power.records[pos];
            let a = (t - t0) / (t1 - t0);
            Some(p0 + a * (p1 - p0))
        })
        .collect();
    if !any && !accum_times.is_empty() {
        return Err(Error::Mismatch(
            "power log does not overlap the accumulation epochs".into(),
        ));
    }
    Ok(out)
}

/// Result of interference excision over a power series.
#[derive(Debug, Clone)]
pub struct Excision {
    /// Keep-mask, one entry per input epoch.
    pub keep: Vec<bool>,
    /// Excision threshold (same units as the series), if a knee was found.
    pub threshold: Option<f64>,
}

/// Marks epochs whose power exceeds the knee of the empirical CDF.
///
/// The empirical CDF is binned at 0.05 dB, its second difference smoothed
/// by a 5-bin moving average, and the knee taken as the first sign change
/// beyond the median where the decaying bulk of the distribution gives way
/// to a rising interference mode. Exclusions are dilated by ±2 epochs so
/// spike edges do not leak, but epochs at or below the series median are
/// never removed. With no knee (monotone second difference) nothing is
/// excised.
pub fn excise_interference(series: &[f64]) -> Excision {
    let all_keep = Excision {
        keep: vec![true; series.len()],
        threshold: None,
    };
    if series.len() < 1000 {
        log::warn!(
            "power series of {} epochs is too short for CDF excision; keeping all",
            series.len()
        );
        return all_keep;
    }
    let min = series.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max - min).is_finite() || max - min < CDF_BIN_DB {
        return all_keep; // constant series
    }
    let n_bins = (((max - min) / CDF_BIN_DB).ceil() as usize + 1).min(200_000);
    let bin_w = (max - min) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &x in series {
        let b = (((x - min) / bin_w) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let total = series.len() as f64;
    let mut cdf = Vec::with_capacity(n_bins);
    let mut acc = 0usize;
    for &c in &counts {
        acc += c;
        cdf.push(acc as f64 / total);
    }

    // Centered second difference, then a moving average.
    let mut d2 = vec![0.0; n_bins];
    for b in 1..n_bins - 1 {
        d2[b] = cdf[b + 1] - 2.0 * cdf[b] + cdf[b - 1];
    }
    let half = CDF_SMOOTH_BINS / 2;
    let smooth: Vec<f64> = (0..n_bins)
        .map(|b| {
            let lo = b.saturating_sub(half);
            let hi = (b + half + 1).min(n_bins);
            d2[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();

    let mut sorted: Vec<f64> = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let median_bin = (((median - min) / bin_w) as usize).min(n_bins - 1);

    let mut threshold = None;
    for b in (median_bin + 1)..n_bins.saturating_sub(1) {
        if smooth[b] < 0.0 && smooth[b + 1] > 0.0 {
            threshold = Some((min + (b as f64 + 1.5) * bin_w).max(median));
            break;
        }
    }
    let Some(threshold) = threshold else {
        log::warn!("no CDF knee found; keeping all epochs");
        return all_keep;
    };

    let over: Vec<bool> = series.iter().map(|&x| x > threshold).collect();
    let keep: Vec<bool> = series
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x <= median {
                return true;
            }
            let lo = i.saturating_sub(EXCISE_DILATION);
            let hi = (i + EXCISE_DILATION + 1).min(series.len());
            !over[lo..hi].iter().any(|&o| o)
        })
        .collect();
    Excision {
        keep,
        threshold: Some(threshold),
    }
}

/// Builds the observation stream: `D` from the ±τ_d taps of each epoch and
/// `P` from the aligned relative power series. Epochs with an invalid or
/// excised power value are omitted.
pub fn observations_from_log(
    log: &AccumulationLog,
    power_db_rel: &[Option<f64>],
    sigma_n0: f64,
    tau_d: f64,
) -> Result<Vec<(f64, Observation)>> {
    if !(sigma_n0 > 0.0) {
        return Err(Error::InvalidParameter("sigma_n0 must be positive".into()));
    }
    if power_db_rel.len() != log.records.len() {
        return Err(Error::Mismatch(format!(
            "power series has {} epochs, log has {}",
            power_db_rel.len(),
            log.records.len()
        )));
    }
    let early = log
        .tap_index(-tau_d)
        .ok_or_else(|| Error::Mismatch(format!("log has no tap at {} chips", -tau_d)))?;
    let late = log
        .tap_index(tau_d)
        .ok_or_else(|| Error::Mismatch(format!("log has no tap at {tau_d} chips")))?;
    let mut out = Vec::with_capacity(log.records.len());
    for (r, p) in log.records.iter().zip(power_db_rel) {
        let Some(p) = p else { continue };
        let d = (r.values[early] - r.values[late]).norm() / sigma_n0;
        out.push((r.t_s, Observation { d, p: *p }));
    }
    Ok(out)
}
