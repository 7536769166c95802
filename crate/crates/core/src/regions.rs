//! Monte-Carlo construction of Bayes-optimal decision regions.
//!
//! The observation plane is cut into uniform rectangular cells. Tagged
//! parameter vectors are drawn from the hypothesis priors, observations are
//! simulated for each, and every cell starts with the majority hypothesis of
//! the samples it contains. Boundary cells are then greedily relabeled
//! whenever the move strictly lowers the operational Bayes risk
//!
//! ```text
//! r(δ) = (1 / N_P N_M) Σ_i Σ_l Σ_m C[δ(z_mli), θ_li]
//! ```
//!
//! subject to every decision region staying simply connected: each label's
//! cells form at most one 4-connected component with no enclosed holes
//! (holes are detected by flood-filling the label's complement from the
//! grid border, 8-connected). Relabel legality is checked locally with the
//! Yokoi connectivity number and re-verified globally at sweep boundaries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correlator::{ChannelConfig, InterferenceParams};
use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::observables::{Observation, ObservationRow, Simulator};
use crate::priors::{sample_theta, Hypothesis, PriorConfig};

/// Required fraction of samples inside the grid extent.
const COVERAGE_REQUIRED: f64 = 0.999;

/// Hard cap on refinement sweeps; reaching it is an error.
pub const DEFAULT_SWEEP_CAP: usize = 500;

/// Iteration guard for the island/hole removal fixpoint.
const PARTITION_FIXPOINT_CAP: usize = 100;

/// Uniform rectangular partition of the `(D, P)` observation plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub d_min: f64,
    pub d_max: f64,
    pub n_d: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
}

impl Default for GridSpec {
    /// `D ∈ [0, 40]` at 0.1 per cell, `P ∈ [-2, +15]` dB at 0.1 dB per cell.
    fn default() -> Self {
        Self {
            d_min: 0.0,
            d_max: 40.0,
            n_d: 400,
            p_min: -2.0,
            p_max: 15.0,
            n_p: 170,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_d < 16 || self.n_p < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 16 cells per axis, got {}x{}",
                self.n_d, self.n_p
            )));
        }
        if !(self.d_max > self.d_min) || !(self.p_max > self.p_min) {
            return Err(Error::InvalidParameter(
                "grid ranges must be nonempty".into(),
            ));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.n_d * self.n_p
    }

    pub fn cell_width(&self) -> f64 {
        (self.d_max - self.d_min) / self.n_d as f64
    }

    pub fn cell_height(&self) -> f64 {
        (self.p_max - self.p_min) / self.n_p as f64
    }

    /// Cell coordinates of an observation; out-of-range observations clamp
    /// to the nearest border cell.
    pub fn cell_of(&self, z: &Observation) -> (usize, usize) {
        let col = ((z.d - self.d_min) / self.cell_width()).floor() as i64;
        let row = ((z.p - self.p_min) / self.cell_height()).floor() as i64;
        (
            col.clamp(0, self.n_d as i64 - 1) as usize,
            row.clamp(0, self.n_p as i64 - 1) as usize,
        )
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.n_d + col
    }

    pub fn center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.d_min + (col as f64 + 0.5) * self.cell_width(),
            self.p_min + (row as f64 + 0.5) * self.cell_height(),
        )
    }

    fn inside(&self, z: &Observation) -> bool {
        z.d >= self.d_min && z.d <= self.d_max && z.p >= self.p_min && z.p <= self.p_max
    }
}

/// A labeled decision-region grid with build provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: GridSpec,
    /// Row-major from `p_min`; one hypothesis index per cell.
    pub labels: Vec<u8>,
    pub seed: u64,
    pub risk: f64,
    pub sweeps: usize,
}

impl Grid {
    pub fn label_at(&self, col: usize, row: usize) -> Hypothesis {
        Hypothesis::from_index(self.labels[self.spec.index(col, row)] as usize)
            .expect("stored labels are valid")
    }

    /// Checks the connectivity invariant: every label's cells form at most
    /// one 4-connected component with no enclosed holes.
    pub fn topology_ok(&self) -> bool {
        (0..4u8).all(|l| label_topology_ok(&self.labels, &self.spec, l))
    }
}

/// One tagged parameter draw and its simulated observations.
#[derive(Debug, Clone)]
pub struct ThetaRecord {
    pub theta: InterferenceParams,
    pub hypothesis: Hypothesis,
    pub observations: Vec<Observation>,
}

/// Tagged Monte-Carlo draws used for region construction and risk evaluation.
#[derive(Debug, Clone, Default)]
pub struct SampleSet {
    pub records: Vec<ThetaRecord>,
}

impl SampleSet {
    /// Parameter-draw counts per hypothesis.
    pub fn theta_counts(&self) -> [usize; 4] {
        let mut out = [0usize; 4];
        for r in &self.records {
            out[r.hypothesis.index()] += 1;
        }
        out
    }

    pub fn total_observations(&self) -> usize {
        self.records.iter().map(|r| r.observations.len()).sum()
    }

    /// Flattens to CSV rows, one per observation.
    pub fn rows(&self) -> impl Iterator<Item = ObservationRow> + '_ {
        self.records.iter().flat_map(|r| {
            r.observations
                .iter()
                .map(move |&observation| ObservationRow {
                    hypothesis: r.hypothesis,
                    theta: r.theta,
                    observation,
                })
        })
    }

    /// Rebuilds a sample set from CSV rows (one record per row).
    pub fn from_rows(rows: Vec<ObservationRow>) -> Self {
        Self {
            records: rows
                .into_iter()
                .map(|r| ThetaRecord {
                    theta: r.theta,
                    hypothesis: r.hypothesis,
                    observations: vec![r.observation],
                })
                .collect(),
        }
    }
}

/// Draws `round(π_i N_P)` parameter vectors per hypothesis and `n_m`
/// observations for each.
///
/// Every record owns its own counter-mode RNG stream derived from `seed`
/// and the record index, so results are bit-identical regardless of thread
/// count.
pub fn generate_samples(
    priors: &PriorConfig,
    cfg: &ChannelConfig,
    n_p_total: usize,
    n_m: usize,
    seed: u64,
) -> Result<SampleSet> {
    priors.validate()?;
    cfg.validate()?;
    if n_p_total == 0 || n_m == 0 {
        return Err(Error::InvalidParameter(
            "n_p_total and n_m must be positive".into(),
        ));
    }
    let counts = priors.draw_counts(n_p_total);
    let sim = Simulator::new(cfg)?;

    let mut plan = Vec::with_capacity(counts.iter().sum());
    for h in Hypothesis::ALL {
        plan.extend(std::iter::repeat_n(h, counts[h.index()]));
    }

    let records: Result<Vec<ThetaRecord>> = plan
        .par_iter()
        .enumerate()
        .map(|(l, &hypothesis)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(l as u64);
            let theta = sample_theta(hypothesis, priors, &mut rng)?;
            let observations = sim.observe_batch(&theta, hypothesis, n_m, &mut rng)?;
            Ok(ThetaRecord {
                theta,
                hypothesis,
                observations,
            })
        })
        .collect();
    Ok(SampleSet { records: records? })
}

/// Per-cell aggregates that make risk evaluation and refinement cheap: the
/// summed decision costs of all observations in the cell, per candidate
/// label.
#[derive(Debug, Clone)]
struct CellStats {
    cost: Vec<[f64; 4]>,
    total_obs: usize,
}

impl CellStats {
    fn build(spec: &GridSpec, samples: &SampleSet, cost_model: &CostModel) -> Self {
        // Cost vectors are computed in parallel (deterministic order), the
        // float accumulation below stays sequential for reproducibility.
        let vectors: Vec<[f64; 4]> = samples
            .records
            .par_iter()
            .map(|r| cost_model.cost_vector(&r.theta, r.hypothesis))
            .collect();
        let mut cost = vec![[0.0f64; 4]; spec.cells()];
        let mut total_obs = 0usize;
        for (r, cv) in samples.records.iter().zip(&vectors) {
            for z in &r.observations {
                let (c, w) = spec.cell_of(z);
                let idx = spec.index(c, w);
                for k in 0..4 {
                    cost[idx][k] += cv[k];
                }
                total_obs += 1;
            }
        }
        Self { cost, total_obs }
    }

    fn risk_of_labels(&self, labels: &[u8]) -> f64 {
        let sum: f64 = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| self.cost[i][l as usize])
            .sum();
        sum / self.total_obs as f64
    }
}

/// Majority-label partition with nearest-cell fill for empty cells and
/// island/hole removal, yielding a simply connected starting grid.
pub fn initial_partition(spec: &GridSpec, samples: &SampleSet) -> Result<Grid> {
    spec.validate()?;
    let total = samples.total_observations();
    if total == 0 {
        return Err(Error::InvalidParameter("sample set is empty".into()));
    }
    let inside = samples
        .records
        .iter()
        .flat_map(|r| &r.observations)
        .filter(|z| spec.inside(z))
        .count();
    let covered = inside as f64 / total as f64;
    if covered < COVERAGE_REQUIRED {
        return Err(Error::GridCoverage {
            covered,
            required: COVERAGE_REQUIRED,
        });
    }

    let mut count = vec![[0u32; 4]; spec.cells()];
    for r in &samples.records {
        let h = r.hypothesis.index();
        for z in &r.observations {
            let (c, w) = spec.cell_of(z);
            count[spec.index(c, w)][h] += 1;
        }
    }

    let mut labels = vec![0u8; spec.cells()];
    let mut empty = Vec::new();
    for (i, counts) in count.iter().enumerate() {
        let total: u32 = counts.iter().sum();
        if total == 0 {
            empty.push(i);
            continue;
        }
        // Majority label, ties to the lower hypothesis index.
        let mut best = 0usize;
        for k in 1..4 {
            if counts[k] > counts[best] {
                best = k;
            }
        }
        labels[i] = best as u8;
    }
    fill_empty_cells(spec, &mut labels, &count, &empty);
    remove_islands_and_holes(spec, &mut labels)?;
    Ok(Grid {
        spec: *spec,
        labels,
        seed: 0,
        risk: f64::NAN,
        sweeps: 0,
    })
}

/// Assigns each empty cell the label of the nearest non-empty cell by
/// Euclidean center distance, ties to the lower hypothesis index.
fn fill_empty_cells(spec: &GridSpec, labels: &mut [u8], count: &[[u32; 4]], empty: &[usize]) {
    if empty.is_empty() {
        return;
    }
    // Non-empty columns per row, sorted, for pruned row-band searches.
    let mut filled_by_row: Vec<Vec<usize>> = vec![Vec::new(); spec.n_p];
    for (row, filled) in filled_by_row.iter_mut().enumerate() {
        for col in 0..spec.n_d {
            let idx = spec.index(col, row);
            if count[idx].iter().any(|&c| c > 0) {
                filled.push(col);
            }
        }
    }
    let w = spec.cell_width();
    let h = spec.cell_height();
    let filled_labels = labels.to_vec();

    for &idx in empty {
        let row0 = idx / spec.n_d;
        let col0 = idx % spec.n_d;
        let mut best_d2 = f64::INFINITY;
        let mut best_label = u8::MAX;
        for dr in 0..spec.n_p as i64 {
            let mut exhausted = true;
            for row in [row0 as i64 - dr, row0 as i64 + dr] {
                if dr == 0 && row != row0 as i64 {
                    continue;
                }
                if row < 0 || row >= spec.n_p as i64 {
                    continue;
                }
                let dy = dr as f64 * h;
                if dy * dy > best_d2 + 1e-12 {
                    continue;
                }
                exhausted = false;
                let cols = &filled_by_row[row as usize];
                if cols.is_empty() {
                    continue;
                }
                // Only the nearest filled column on each side can win or tie.
                let pos = cols.partition_point(|&c| c < col0);
                let mut consider = |col: usize| {
                    let dx = (col as f64 - col0 as f64) * w;
                    let d2 = dx * dx + dy * dy;
                    let label = filled_labels[spec.index(col, row as usize)];
                    if !best_d2.is_finite() {
                        best_d2 = d2;
                        best_label = label;
                        return;
                    }
                    let tol = 1e-9 * best_d2.max(1e-30);
                    if d2 < best_d2 - tol {
                        best_d2 = d2;
                        best_label = label;
                    } else if (d2 - best_d2).abs() <= tol && label < best_label {
                        best_label = label;
                    }
                };
                if pos > 0 {
                    consider(cols[pos - 1]);
                }
                if pos < cols.len() {
                    consider(cols[pos]);
                }
            }
            if exhausted && dr > 0 {
                break;
            }
        }
        debug_assert!(best_label < 4);
        labels[idx] = best_label;
    }
}

const N4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const N8: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn neighbor(spec: &GridSpec, idx: usize, d: (i64, i64)) -> Option<usize> {
    let col = (idx % spec.n_d) as i64 + d.0;
    let row = (idx / spec.n_d) as i64 + d.1;
    if col < 0 || row < 0 || col >= spec.n_d as i64 || row >= spec.n_p as i64 {
        None
    } else {
        Some(spec.index(col as usize, row as usize))
    }
}

/// 4-connected components of one label, in row-major discovery order.
fn label_components(labels: &[u8], spec: &GridSpec, label: u8) -> Vec<Vec<usize>> {
    let mut seen = vec![false; labels.len()];
    let mut comps = Vec::new();
    for start in 0..labels.len() {
        if labels[start] != label || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            for d in N4 {
                if let Some(j) = neighbor(spec, i, d) {
                    if labels[j] == label && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        comps.push(comp);
    }
    comps
}

/// Enclosed complement components of one label: cells not carrying `label`
/// that an 8-connected flood from the grid border cannot reach.
fn label_holes(labels: &[u8], spec: &GridSpec, label: u8) -> Vec<usize> {
    let mut reached = vec![false; labels.len()];
    let mut stack = Vec::new();
    for col in 0..spec.n_d {
        for row in [0, spec.n_p - 1] {
            let i = spec.index(col, row);
            if labels[i] != label && !reached[i] {
                reached[i] = true;
                stack.push(i);
            }
        }
    }
    for row in 0..spec.n_p {
        for col in [0, spec.n_d - 1] {
            let i = spec.index(col, row);
            if labels[i] != label && !reached[i] {
                reached[i] = true;
                stack.push(i);
            }
        }
    }
    while let Some(i) = stack.pop() {
        for d in N8 {
            if let Some(j) = neighbor(spec, i, d) {
                if labels[j] != label && !reached[j] {
                    reached[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    (0..labels.len())
        .filter(|&i| labels[i] != label && !reached[i])
        .collect()
}

fn label_topology_ok(labels: &[u8], spec: &GridSpec, label: u8) -> bool {
    let comps = label_components(labels, spec, label);
    if comps.len() > 1 {
        return false;
    }
    if comps.is_empty() {
        return true; // degenerate label: never decided
    }
    label_holes(labels, spec, label).is_empty()
}

/// Floods non-largest components to the majority label of their boundary
/// neighbors and fills enclosed holes, iterating to a joint fixpoint.
fn remove_islands_and_holes(spec: &GridSpec, labels: &mut [u8]) -> Result<()> {
    for _ in 0..PARTITION_FIXPOINT_CAP {
        let mut changed = false;
        for label in 0..4u8 {
            let mut comps = label_components(labels, spec, label);
            if comps.len() > 1 {
                // Keep the largest component (first in discovery order on
                // ties), flood the rest.
                let keep = comps
                    .iter()
                    .enumerate()
                    .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
                    .map(|(i, _)| i)
                    .unwrap();
                comps.swap_remove(keep);
                for comp in comps {
                    let mut votes = [0u32; 4];
                    for &i in &comp {
                        for d in N4 {
                            if let Some(j) = neighbor(spec, i, d) {
                                if labels[j] != label {
                                    votes[labels[j] as usize] += 1;
                                }
                            }
                        }
                    }
                    let mut winner = 0usize;
                    for k in 1..4 {
                        if votes[k] > votes[winner] {
                            winner = k;
                        }
                    }
                    for &i in &comp {
                        labels[i] = winner as u8;
                    }
                    changed = true;
                }
            }
            let holes = label_holes(labels, spec, label);
            if !holes.is_empty() {
                for i in holes {
                    labels[i] = label;
                }
                changed = true;
            }
        }
        if !changed {
            return Ok(());
        }
    }
    Err(Error::NoConvergence {
        cap: PARTITION_FIXPOINT_CAP,
    })
}

/// Yokoi connectivity number for 4-connected foreground on the ordered
/// 8-neighborhood (E, NE, N, NW, W, SW, S, SE). A cell is a simple point —
/// adding or removing it preserves both component count and hole count —
/// exactly when the number is 1.
fn yokoi4(n8: [bool; 8]) -> u32 {
    let x = |k: usize| n8[k % 8] as u32;
    (0..4)
        .map(|q| {
            let k = 2 * q;
            x(k) - x(k) * x(k + 1) * x(k + 2)
        })
        .sum()
}

fn neighborhood_mask(labels: &[u8], spec: &GridSpec, idx: usize, label: u8) -> [bool; 8] {
    let mut out = [false; 8];
    for (k, d) in N8.iter().enumerate() {
        if let Some(j) = neighbor(spec, idx, *d) {
            out[k] = labels[j] == label;
        }
    }
    out
}

/// Whether relabeling `idx` from `from` to `to` keeps both affected regions
/// simply connected. Uses the local simple-point criterion; removing the
/// last cell of a region is allowed (the region becomes degenerate).
fn relabel_preserves_topology(
    labels: &[u8],
    spec: &GridSpec,
    idx: usize,
    from: u8,
    to: u8,
) -> bool {
    let from_mask = neighborhood_mask(labels, spec, idx, from);
    let removal_ok = if from_mask.iter().all(|&b| !b) {
        // No 4- or 8-neighbors left: legal only if this is the region's
        // final cell.
        labels.iter().filter(|&&l| l == from).count() == 1
    } else {
        yokoi4(from_mask) == 1
    };
    if !removal_ok {
        return false;
    }
    let to_mask = neighborhood_mask(labels, spec, idx, to);
    yokoi4(to_mask) == 1
}

/// Outcome of a refinement run.
#[derive(Debug, Clone)]
pub struct RefineReport {
    pub initial_risk: f64,
    pub final_risk: f64,
    pub sweeps: usize,
    /// Risk after each sweep.
    pub risk_trace: Vec<f64>,
    pub relabeled_cells: usize,
}

/// Operational Bayes risk of a grid over a sample set: the mean decision
/// cost with out-of-grid observations clamped to border cells.
///
/// This is the direct per-sample sum and serves as the independent check on
/// the incremental bookkeeping inside [`refine`].
pub fn bayes_risk(grid: &Grid, samples: &SampleSet, cost_model: &CostModel) -> f64 {
    let total = samples.total_observations();
    if total == 0 {
        return 0.0;
    }
    let per_record: Vec<f64> = samples
        .records
        .par_iter()
        .map(|r| {
            let cv = cost_model.cost_vector(&r.theta, r.hypothesis);
            r.observations
                .iter()
                .map(|z| {
                    let (c, w) = grid.spec.cell_of(z);
                    cv[grid.labels[grid.spec.index(c, w)] as usize]
                })
                .sum::<f64>()
        })
        .collect();
    per_record.iter().sum::<f64>() / total as f64
}

/// Greedy boundary refinement: sweeps all boundary cells in row-major order
/// and applies the best strictly-risk-reducing relabel to a neighbor's label
/// that preserves simple connectivity of both affected regions. Terminates
/// when a full sweep makes no change.
pub fn refine(
    grid: &Grid,
    samples: &SampleSet,
    cost_model: &CostModel,
) -> Result<(Grid, RefineReport)> {
    refine_with_cap(grid, samples, cost_model, DEFAULT_SWEEP_CAP)
}

pub fn refine_with_cap(
    grid: &Grid,
    samples: &SampleSet,
    cost_model: &CostModel,
    sweep_cap: usize,
) -> Result<(Grid, RefineReport)> {
    let spec = grid.spec;
    let stats = CellStats::build(&spec, samples, cost_model);
    let mut labels = grid.labels.clone();
    let mut risk = stats.risk_of_labels(&labels);
    let initial_risk = risk;
    let mut trace = Vec::new();
    let mut relabeled = 0usize;

    for sweep in 0..sweep_cap {
        let mut changed = 0usize;
        for idx in 0..labels.len() {
            let cur = labels[idx];
            let mut candidate: Option<(f64, u8)> = None;
            for d in N4 {
                let Some(j) = neighbor(&spec, idx, d) else {
                    continue;
                };
                let cand = labels[j];
                if cand == cur {
                    continue;
                }
                let delta = stats.cost[idx][cand as usize] - stats.cost[idx][cur as usize];
                if delta >= 0.0 {
                    continue;
                }
                // Best strict improvement; ties go to the lower hypothesis
                // index via the strict `<` with ascending neighbor labels.
                let better = match candidate {
                    Some((best, best_label)) => {
                        delta < best || (delta == best && cand < best_label)
                    }
                    None => true,
                };
                if better && relabel_preserves_topology(&labels, &spec, idx, cur, cand) {
                    candidate = Some((delta, cand));
                }
            }
            if let Some((delta, new_label)) = candidate {
                labels[idx] = new_label;
                risk += delta / stats.total_obs as f64;
                changed += 1;
                relabeled += 1;
                debug_assert!(
                    label_topology_ok(&labels, &spec, cur)
                        && label_topology_ok(&labels, &spec, new_label),
                    "relabel broke topology at cell {idx}"
                );
            }
        }
        trace.push(risk);

        // Incremental bookkeeping must agree with a full recomputation.
        let recomputed = stats.risk_of_labels(&labels);
        debug_assert!(
            (risk - recomputed).abs() <= 1e-12 * recomputed.abs().max(1e-30),
            "incremental risk {risk} drifted from {recomputed}"
        );
        risk = recomputed;

        if !(0..4u8).all(|l| label_topology_ok(&labels, &spec, l)) {
            return Err(Error::Mismatch(format!(
                "connectivity invariant violated after sweep {sweep}"
            )));
        }
        if changed == 0 {
            let out = Grid {
                spec,
                labels,
                seed: grid.seed,
                risk,
                sweeps: trace.len(),
            };
            return Ok((
                out,
                RefineReport {
                    initial_risk,
                    final_risk: risk,
                    sweeps: trace.len(),
                    risk_trace: trace,
                    relabeled_cells: relabeled,
                },
            ));
        }
    }
    Err(Error::NoConvergence { cap: sweep_cap })
}

/// Build provenance recorded alongside the final grid.
#[derive(Debug, Clone)]
pub struct BuildReport {
    pub seed: u64,
    pub theta_counts: [usize; 4],
    pub total_observations: usize,
    pub refine: RefineReport,
}

/// Full pipeline: sample generation, initial partition, refinement.
pub fn build_regions(
    priors: &PriorConfig,
    cfg: &ChannelConfig,
    cost_model: &CostModel,
    spec: &GridSpec,
    n_p_total: usize,
    n_m: usize,
    seed: u64,
) -> Result<(Grid, BuildReport)> {
    let samples = generate_samples(priors, cfg, n_p_total, n_m, seed)?;
    let mut grid = initial_partition(spec, &samples)?;
    grid.seed = seed;
    let (refined, report) = refine(&grid, &samples, cost_model)?;
    Ok((
        refined,
        BuildReport {
            seed,
            theta_counts: samples.theta_counts(),
            total_observations: samples.total_observations(),
            refine: report,
        },
    ))
}

const REGION_MAGIC: &str = "PDREGIONS v1";

/// Writes the versioned region file format:
///
/// ```text
/// PDREGIONS v1
/// <d_min> <d_max> <n_d>
/// <p_min> <p_max> <n_p>
/// <seed> <risk> <sweeps>
/// <n_p lines of n_d label digits, row-major from p_min>
/// ```
pub fn write_region_file<W: std::io::Write>(w: &mut W, grid: &Grid) -> Result<()> {
    writeln!(w, "{REGION_MAGIC}")?;
    writeln!(
        w,
        "{} {} {}",
        grid.spec.d_min, grid.spec.d_max, grid.spec.n_d
    )?;
    writeln!(
        w,
        "{} {} {}",
        grid.spec.p_min, grid.spec.p_max, grid.spec.n_p
    )?;
    writeln!(w, "{} {} {}", grid.seed, grid.risk, grid.sweeps)?;
    let mut line = String::with_capacity(grid.spec.n_d);
    for row in 0..grid.spec.n_p {
        line.clear();
        for col in 0..grid.spec.n_d {
            let l = grid.labels[grid.spec.index(col, row)];
            line.push(char::from(b'0' + l));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_region_file<R: std::io::BufRead>(r: R, path: &str) -> Result<Grid> {
    let mut lines = r.lines();
    let mut lineno = 0usize;
    let mut next_line = |what: &str| -> Result<String> {
        lineno += 1;
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(e.into()),
            None => Err(Error::Parse {
                path: path.into(),
                line: lineno,
                msg: format!("missing {what}"),
            }),
        }
    };
    let magic = next_line("version line")?;
    if magic.trim() != REGION_MAGIC {
        return Err(Error::Version {
            expected: REGION_MAGIC.into(),
            found: magic.trim().into(),
        });
    }
    fn three<T: std::str::FromStr>(s: &str, path: &str, line: usize) -> Result<[T; 3]> {
        let mut it = s.split_whitespace();
        let mut out = Vec::with_capacity(3);
        for _ in 0..3 {
            let tok = it.next().ok_or_else(|| Error::Parse {
                path: path.into(),
                line,
                msg: "expected three fields".into(),
            })?;
            out.push(tok.parse::<T>().map_err(|_| Error::Parse {
                path: path.into(),
                line,
                msg: format!("bad field {tok:?}"),
            })?);
        }
        out.try_into().map_err(|_| Error::Parse {
            path: path.into(),
            line,
            msg: "expected three fields".into(),
        })
    }
    let d_line = next_line("d-axis line")?;
    let [d_min, d_max, n_d_f]: [f64; 3] = three(&d_line, path, 2)?;
    let p_line = next_line("p-axis line")?;
    let [p_min, p_max, n_p_f]: [f64; 3] = three(&p_line, path, 3)?;
    let meta_line = next_line("provenance line")?;
    let mut meta = meta_line.split_whitespace();
    let seed: u64 = meta
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse {
            path: path.into(),
            line: 4,
            msg: "bad seed".into(),
        })?;
    let risk: f64 = meta
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse {
            path: path.into(),
            line: 4,
            msg: "bad risk".into(),
        })?;
    let sweeps: usize = meta
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse {
            path: path.into(),
            line: 4,
            msg: "bad sweep count".into(),
        })?;

    let spec = GridSpec {
        d_min,
        d_max,
        n_d: n_d_f as usize,
        p_min,
        p_max,
        n_p: n_p_f as usize,
    };
    spec.validate()?;
    let mut labels = Vec::with_capacity(spec.cells());
    for row in 0..spec.n_p {
        let line = next_line("label row")?;
        let line = line.trim();
        if line.len() != spec.n_d {
            return Err(Error::Parse {
                path: path.into(),
                line: 5 + row,
                msg: format!("expected {} label digits, got {}", spec.n_d, line.len()),
            });
        }
        for ch in line.chars() {
            match ch {
                '0'..='3' => labels.push(ch as u8 - b'0'),
                _ => {
                    return Err(Error::Parse {
                        path: path.into(),
                        line: 5 + row,
                        msg: format!("invalid label {ch:?}"),
                    })
                }
            }
        }
    }
    Ok(Grid {
        spec,
        labels,
        seed,
        risk,
        sweeps,
    })
}
