//! Runtime classification of observation streams against built regions.
//!
//! Single-epoch decisions are plain cell lookups. On top of those sit the
//! operational layers: a shadowing gate that excludes epochs where a deep
//! C/N0 drop without a power anomaly makes multipath indistinguishable from
//! low-power spoofing, m-of-k windowed alarms per channel, cross-channel
//! votes at one epoch, and the cumulative-history and classification-matrix
//! statistics used for evaluation.

use crate::error::{Error, Result};
use crate::observables::Observation;
use crate::priors::Hypothesis;
use crate::regions::Grid;

/// Default power-anomaly threshold (dB relative) for the shadowing gate.
pub const DEFAULT_GATE_POWER_DB: f64 = 1.0;

/// C/N0 drop (dB) beyond which an epoch counts as severely shadowed.
pub const GATE_CN0_DROP_DB: f64 = 6.0;

/// One classified epoch of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord {
    pub time_s: f64,
    pub channel: usize,
    pub observation: Observation,
    pub decision: Hypothesis,
    /// Excluded by the shadowing gate; gated records carry the lookup
    /// result for logging but must not feed statistics or alarms.
    pub gated: bool,
}

/// Raised alarm kind. Spoofing takes precedence over jamming when both
/// windowed conditions hold, being the costlier miss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alarm {
    None,
    Spoofing,
    Jamming,
}

impl std::fmt::Display for Alarm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Alarm::None => "none",
            Alarm::Spoofing => "spoofing",
            Alarm::Jamming => "jamming",
        })
    }
}

/// Classifies one observation by decision-region lookup. Total over the
/// closed observation plane: out-of-grid observations clamp to the border
/// cell, matching how regions were built.
pub fn decide(grid: &Grid, z: &Observation) -> Hypothesis {
    let (col, row) = grid.spec.cell_of(z);
    grid.label_at(col, row)
}

/// Shadowing gate: `true` means exclude the epoch. Fires when the measured
/// C/N0 dropped more than 6 dB below its unobstructed model while received
/// power is not unusually high.
pub fn shadowing_gate(p_db_rel: f64, cn0_drop_db: f64, power_anomaly_db: f64) -> bool {
    cn0_drop_db > GATE_CN0_DROP_DB && p_db_rel < power_anomaly_db
}

/// Normalized cumulative decision counts over time: entry `k` holds, for
/// each hypothesis, the number of decisions up to and including epoch `k`
/// divided by the total count, so the final entries sum to one.
pub fn cumulative_history(decisions: &[Hypothesis]) -> Vec<[f64; 4]> {
    let total = decisions.len().max(1) as f64;
    let mut counts = [0usize; 4];
    decisions
        .iter()
        .map(|d| {
            counts[d.index()] += 1;
            let mut row = [0.0; 4];
            for (slot, &c) in row.iter_mut().zip(&counts) {
                *slot = c as f64 / total;
            }
            row
        })
        .collect()
}

/// Relative-frequency classification matrix: entry `(i, j)` is the fraction
/// of truth-`j` decisions that chose `i`; each column sums to one.
pub fn classification_matrix(decisions: &[(Hypothesis, Hypothesis)]) -> Result<[[f64; 4]; 4]> {
    let mut counts = [[0usize; 4]; 4];
    let mut truth_totals = [0usize; 4];
    for &(decided, truth) in decisions {
        counts[decided.index()][truth.index()] += 1;
        truth_totals[truth.index()] += 1;
    }
    if truth_totals.contains(&0) {
        return Err(Error::InvalidParameter(
            "classification matrix needs every truth class represented".into(),
        ));
    }
    let mut out = [[0.0; 4]; 4];
    for (row, count_row) in out.iter_mut().zip(&counts) {
        for (cell, (&c, &total)) in row.iter_mut().zip(count_row.iter().zip(&truth_totals)) {
            *cell = c as f64 / total as f64;
        }
    }
    Ok(out)
}

/// m-of-k windowed alarm over one channel's recent decisions (the caller
/// passes the last `k` of them): spoofing fires when at least `m` are `H2`,
/// jamming when at least `m` are `H3`, spoofing first.
pub fn windowed_alarm(recent: &[Hypothesis], m: usize) -> Alarm {
    let spoof = recent
        .iter()
        .filter(|&&d| d == Hypothesis::Spoofing)
        .count();
    if spoof >= m {
        return Alarm::Spoofing;
    }
    let jam = recent.iter().filter(|&&d| d == Hypothesis::Jamming).count();
    if jam >= m {
        return Alarm::Jamming;
    }
    Alarm::None
}

/// Cross-channel vote at a single epoch: alarm when at least `n_min`
/// channels agree on an attack hypothesis, spoofing taking precedence.
pub fn multi_channel_vote(decisions: &[Hypothesis], n_min: usize) -> Alarm {
    let spoof = decisions
        .iter()
        .filter(|&&d| d == Hypothesis::Spoofing)
        .count();
    if spoof >= n_min {
        return Alarm::Spoofing;
    }
    let jam = decisions
        .iter()
        .filter(|&&d| d == Hypothesis::Jamming)
        .count();
    if jam >= n_min {
        return Alarm::Jamming;
    }
    Alarm::None
}

/// Sliding m-of-k alarm tracker for one channel.
#[derive(Debug, Clone)]
pub struct WindowVote {
    window: std::collections::VecDeque<Hypothesis>,
    m: usize,
    k: usize,
}

impl WindowVote {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m == 0 || k == 0 || m > k {
            return Err(Error::InvalidParameter(format!(
                "need 0 < m <= k, got m={m}, k={k}"
            )));
        }
        Ok(Self {
            window: std::collections::VecDeque::with_capacity(k),
            m,
            k,
        })
    }

    /// Pushes one (ungated) decision and returns the current alarm state.
    pub fn push(&mut self, decision: Hypothesis) -> Alarm {
        if self.window.len() == self.k {
            self.window.pop_front();
        }
        self.window.push_back(decision);
        self.window.make_contiguous();
        windowed_alarm(self.window.as_slices().0, self.m)
    }
}

/// Writes decision records as CSV: `t,channel,D,P,decision,gated`.
pub fn write_decision_csv<W: std::io::Write>(w: &mut W, records: &[DecisionRecord]) -> Result<()> {
    writeln!(w, "t,channel,D,P,decision,gated")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.time_s,
            r.channel,
            r.observation.d,
            r.observation.p,
            r.decision.index(),
            r.gated as u8
        )?;
    }
    Ok(())
}

/// Writes a 4x4 classification matrix as CSV with H0..H3 row/column labels.
pub fn write_matrix_csv<W: std::io::Write>(w: &mut W, matrix: &[[f64; 4]; 4]) -> Result<()> {
    writeln!(w, "decision,H0,H1,H2,H3")?;
    for (i, row) in matrix.iter().enumerate() {
        writeln!(w, "H{},{},{},{},{}", i, row[0], row[1], row[2], row[3])?;
    }
    Ok(())
}
