//! Subcommand implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use pd_core::config::{CostKind, KvConfig, RunConfig};
use pd_core::detector::{self, Alarm, DecisionRecord, WindowVote};
use pd_core::observables::{read_observations_csv, write_observations_csv};
use pd_core::priors::Hypothesis;
use pd_core::regions::{
    build_regions, generate_samples, read_region_file, write_region_file, Grid, SampleSet,
};
use pd_core::{ingest, Error as CoreError};

use crate::{CommonOpts, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_PARSE, EXIT_VERSION};

pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::Config(_)) | Some(CoreError::InvalidParameter(_)) => EXIT_CONFIG,
        Some(CoreError::NoConvergence { .. }) => EXIT_CONVERGENCE,
        Some(CoreError::Version { .. }) => EXIT_VERSION,
        Some(CoreError::Parse { .. }) => EXIT_PARSE,
        _ => 1,
    }
}

fn load_config(common: &CommonOpts) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let kv = KvConfig::parse(&text, &path.display().to_string())
                .map_err(|e| CoreError::Config(e.to_string()))?;
            RunConfig::from_kv(&kv)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    if let Some(cost) = &common.cost {
        cfg.cost = match cost.as_str() {
            "uniform" => CostKind::Uniform,
            _ => CostKind::Theta,
        };
    }
    if let Some(pi) = &common.pi {
        let parts = parse_list(pi, 4).map_err(|e| CoreError::Config(e.to_string()))?;
        cfg.priors.pi = [parts[0], parts[1], parts[2], parts[3]];
    }
    if let Some(grid) = &common.grid {
        let g = parse_list(grid, 6).map_err(|e| CoreError::Config(e.to_string()))?;
        cfg.grid.d_min = g[0];
        cfg.grid.d_max = g[1];
        cfg.grid.n_d = g[2] as usize;
        cfg.grid.p_min = g[3];
        cfg.grid.p_max = g[4];
        cfg.grid.n_p = g[5] as usize;
    }
    if let Some(n_p) = common.n_p {
        cfg.n_p = n_p;
    }
    if let Some(n_m) = common.n_m {
        cfg.n_m = n_m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_list(s: &str, n: usize) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("parsing {s:?}"))?;
    if parts.len() != n {
        bail!("expected {n} comma-separated values, got {}", parts.len());
    }
    Ok(parts)
}

fn require_seed(cfg: &RunConfig) -> Result<u64> {
    cfg.seed
        .ok_or_else(|| {
            CoreError::Config("seed is mandatory (pass --seed or set [run] seed)".into())
        })
        .map_err(Into::into)
}

pub fn sample(common: &CommonOpts, out: &Path) -> Result<()> {
    let cfg = load_config(common)?;
    let seed = require_seed(&cfg)?;
    let samples = generate_samples(&cfg.priors, &cfg.channel, cfg.n_p, cfg.n_m, seed)?;
    let counts = samples.theta_counts();
    let mut w = BufWriter::new(File::create(out)?);
    write_observations_csv(&mut w, seed, samples.rows())?;
    w.flush()?;
    println!(
        "wrote {} observations ({} parameter draws) to {}",
        samples.total_observations(),
        samples.records.len(),
        out.display()
    );
    for h in Hypothesis::ALL {
        println!("  {}: {} draws", h, counts[h.index()]);
    }
    Ok(())
}

pub fn build(common: &CommonOpts, out: &Path, dump_grid: Option<&Path>) -> Result<()> {
    let cfg = load_config(common)?;
    let seed = require_seed(&cfg)?;
    let (grid, report) = build_regions(
        &cfg.priors,
        &cfg.channel,
        &cfg.cost_model(),
        &cfg.grid,
        cfg.n_p,
        cfg.n_m,
        seed,
    )?;
    let mut w = BufWriter::new(File::create(out)?);
    write_region_file(&mut w, &grid)?;
    w.flush()?;
    println!(
        "initial risk {:.6}, final risk {:.6} after {} sweeps ({} relabels)",
        report.refine.initial_risk,
        report.refine.final_risk,
        report.refine.sweeps,
        report.refine.relabeled_cells
    );
    println!("regions written to {}", out.display());
    if let Some(path) = dump_grid {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "d,p,label")?;
        for row in 0..grid.spec.n_p {
            for col in 0..grid.spec.n_d {
                let (d, p) = grid.spec.center(col, row);
                writeln!(w, "{d},{p},{}", grid.label_at(col, row).index())?;
            }
        }
        w.flush()?;
        println!("grid dump written to {}", path.display());
    }
    Ok(())
}

fn load_regions(path: &Path) -> Result<Grid> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let grid = read_region_file(BufReader::new(f), &path.display().to_string())?;
    Ok(grid)
}

pub fn evaluate(
    common: &CommonOpts,
    regions: &Path,
    observations: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let cfg = load_config(common)?;
    let grid = load_regions(regions)?;
    let samples: SampleSet = match observations {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let (csv_seed, rows) =
                read_observations_csv(BufReader::new(f), &path.display().to_string())?;
            if csv_seed == Some(grid.seed) {
                println!(
                    "warning: evaluating on the training set (seed {}); rates will be optimistic",
                    grid.seed
                );
            }
            SampleSet::from_rows(rows)
        }
        None => {
            let seed = require_seed(&cfg)?;
            if seed == grid.seed {
                println!(
                    "warning: evaluation seed equals the region build seed {}; rates will be optimistic",
                    seed
                );
            }
            generate_samples(&cfg.priors, &cfg.channel, cfg.n_p, cfg.n_m, seed)?
        }
    };

    let grid_ref = &grid;
    let pairs: Vec<(Hypothesis, Hypothesis)> = samples
        .records
        .iter()
        .flat_map(|r| {
            r.observations
                .iter()
                .map(move |z| (detector::decide(grid_ref, z), r.hypothesis))
        })
        .collect();
    let matrix = detector::classification_matrix(&pairs)?;

    println!("classification matrix (columns = truth):");
    println!("decide     H0       H1       H2       H3");
    for (i, row) in matrix.iter().enumerate() {
        println!(
            "  H{}   {:.4}   {:.4}   {:.4}   {:.4}",
            i, row[0], row[1], row[2], row[3]
        );
    }
    let h0_false_alarm = matrix[2][0] + matrix[3][0];
    let h1_attack_rate = matrix[2][1] + matrix[3][1];
    let spoof_detection = matrix[2][2] + matrix[3][2];
    println!("H0 false-alarm rate (H2 or H3): {h0_false_alarm:.4}");
    println!("H1 -> attack rate (H2 or H3):   {h1_attack_rate:.4}");
    println!("H2 detected as attack:          {spoof_detection:.4}");

    let mut w = BufWriter::new(File::create(out)?);
    detector::write_matrix_csv(&mut w, &matrix)?;
    w.flush()?;
    println!("matrix written to {}", out.display());
    Ok(())
}

struct ChannelRun {
    channel: usize,
    records: Vec<DecisionRecord>,
    /// Alarm transitions (time, alarm).
    alarms: Vec<(f64, Alarm)>,
}

#[allow(clippy::too_many_arguments)]
pub fn classify(
    common: &CommonOpts,
    regions: &Path,
    accum_paths: &[std::path::PathBuf],
    power_path: &Path,
    vote: Option<&str>,
    channels: Option<usize>,
    quiet: Option<&str>,
    out_dir: &Path,
) -> Result<()> {
    let cfg = load_config(common)?;
    let grid = load_regions(regions)?;
    let (vote_m, vote_k) = match vote {
        Some(v) => {
            let parts = parse_list(v, 2).map_err(|e| CoreError::Config(e.to_string()))?;
            (parts[0] as usize, parts[1] as usize)
        }
        None => (cfg.vote_m, cfg.vote_k),
    };
    let n_min = channels.unwrap_or(cfg.channels_n_min);
    let (quiet_t0, quiet_t1) = match quiet {
        Some(q) => {
            let parts = parse_list(q, 2).map_err(|e| CoreError::Config(e.to_string()))?;
            (parts[0], parts[1])
        }
        None => (cfg.quiet_t0, cfg.quiet_t1),
    };

    let f = File::open(power_path).with_context(|| format!("opening {}", power_path.display()))?;
    let power = ingest::read_power_log(BufReader::new(f), &power_path.display().to_string())?;

    std::fs::create_dir_all(out_dir)?;
    let decimate_factor = 10;
    let mut runs = Vec::new();
    let mut cdf_dump: Option<(Vec<f64>, Option<f64>)> = None;

    for path in accum_paths {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let raw = ingest::read_accum_log(BufReader::new(f), &path.display().to_string())?;

        // Noise reference from the raw rate, carried to the decimated rate.
        let sigma_raw = ingest::estimate_sigma_n0(&raw, (quiet_t0, quiet_t1))?;
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
        if !(sigma_raw > 0.0) {
            bail!(CoreError::InvalidParameter(
                "quiet-window noise estimate is zero".into()
            ));
        }
        let sigma_n0 = sigma_raw / (decimate_factor as f64).sqrt();

        let dec = ingest::decimate(&raw, decimate_factor)?;
        let times: Vec<f64> = dec.records.iter().map(|r| r.t_s).collect();
        let aligned = ingest::align_power(&power, &times)?;

        // 0-dB reference: mean aligned power over the quiet window.
        let quiet_vals: Vec<f64> = times
            .iter()
            .zip(&aligned)
            .filter(|(t, p)| **t >= quiet_t0 && **t <= quiet_t1 && p.is_some())
            .map(|(_, p)| p.unwrap())
            .collect();
        if quiet_vals.is_empty() {
            bail!(CoreError::Mismatch(
                "no valid power samples in the quiet window".into()
            ));
        }
        let p_ref = quiet_vals.iter().sum::<f64>() / quiet_vals.len() as f64;
        let rel: Vec<Option<f64>> = aligned.iter().map(|p| p.map(|v| v - p_ref)).collect();

        // Excision over the valid epochs.
        let valid_series: Vec<f64> = rel.iter().flatten().copied().collect();
        let excision = ingest::excise_interference(&valid_series);
        if cdf_dump.is_none() {
            cdf_dump = Some((valid_series.clone(), excision.threshold));
        }
        let mut keep_iter = excision.keep.iter();
        let gated: Vec<bool> = rel
            .iter()
            .map(|p| p.is_some() && !*keep_iter.next().unwrap_or(&true))
            .collect();

        let obs = ingest::observations_from_log(&dec, &rel, sigma_n0, cfg.channel.tau_d)?;
        let mut by_time = obs.into_iter();
        let mut records = Vec::new();
        let mut voter = WindowVote::new(vote_m, vote_k)?;
        let mut alarms = Vec::new();
        let mut last_alarm = Alarm::None;
        for (i, t) in times.iter().enumerate() {
            if rel[i].is_none() {
                continue; // no power sample at all
            }
            let (ot, z) = by_time.next().expect("observation per valid epoch");
            debug_assert!((ot - t).abs() < 1e-9);
            let decision = detector::decide(&grid, &z);
            let is_gated = gated[i];
            records.push(DecisionRecord {
                time_s: *t,
                channel: raw.channel,
                observation: z,
                decision,
                gated: is_gated,
            });
            if !is_gated {
                let alarm = voter.push(decision);
                if alarm != last_alarm {
                    alarms.push((*t, alarm));
                    last_alarm = alarm;
                }
            }
        }
        runs.push(ChannelRun {
            channel: raw.channel,
            records,
            alarms,
        });
    }

    // Per-channel outputs.
    let mut all_records: Vec<&DecisionRecord> = runs.iter().flat_map(|r| &r.records).collect();
    all_records.sort_by(|a, b| {
        a.time_s
            .total_cmp(&b.time_s)
            .then(a.channel.cmp(&b.channel))
    });
    let decisions_path = out_dir.join("decisions.csv");
    {
        let mut w = BufWriter::new(File::create(&decisions_path)?);
        let owned: Vec<DecisionRecord> = all_records.iter().map(|r| **r).collect();
        detector::write_decision_csv(&mut w, &owned)?;
        w.flush()?;
    }

    // Cumulative history over ungated decisions of the first channel.
    let history_path = out_dir.join("fig7_history.csv");
    {
        let first = &runs[0];
        let kept: Vec<(f64, Hypothesis)> = first
            .records
            .iter()
            .filter(|r| !r.gated)
            .map(|r| (r.time_s, r.decision))
            .collect();
        let traces =
            detector::cumulative_history(&kept.iter().map(|(_, d)| *d).collect::<Vec<_>>());
        let mut w = BufWriter::new(File::create(&history_path)?);
        writeln!(w, "t,H0,H1,H2,H3")?;
        for ((t, _), row) in kept.iter().zip(traces) {
            writeln!(w, "{t},{},{},{},{}", row[0], row[1], row[2], row[3])?;
        }
        w.flush()?;
    }

    // Alarm events: per-channel windowed votes plus the multi-channel vote.
    let alarms_path = out_dir.join("alarms.csv");
    {
        let mut w = BufWriter::new(File::create(&alarms_path)?);
        writeln!(w, "t,channel,alarm")?;
        for run in &runs {
            for (t, alarm) in &run.alarms {
                writeln!(w, "{t},{},{alarm}", run.channel)?;
            }
        }
        if runs.len() > 1 {
            let mut epochs: std::collections::BTreeMap<u64, Vec<Hypothesis>> = Default::default();
            for run in &runs {
                for r in run.records.iter().filter(|r| !r.gated) {
                    epochs
                        .entry((r.time_s * 1e6).round() as u64)
                        .or_default()
                        .push(r.decision);
                }
            }
            let mut last = Alarm::None;
            for (tk, decisions) in epochs {
                let alarm = detector::multi_channel_vote(&decisions, n_min);
                if alarm != last {
                    writeln!(w, "{},all,{alarm}", tk as f64 / 1e6)?;
                    last = alarm;
                }
            }
        }
        w.flush()?;
    }

    // Empirical power CDF with the excision threshold.
    let cdf_path = out_dir.join("fig8_cdf.csv");
    if let Some((mut series, threshold)) = cdf_dump {
        series.sort_by(|a, b| a.total_cmp(b));
        let mut w = BufWriter::new(File::create(&cdf_path)?);
        match threshold {
            Some(t) => writeln!(w, "# threshold={t}")?,
            None => writeln!(w, "# threshold=none")?,
        }
        writeln!(w, "p_db,cdf")?;
        let n = series.len() as f64;
        for (i, p) in series.iter().enumerate() {
            writeln!(w, "{p},{}", (i + 1) as f64 / n)?;
        }
        w.flush()?;
    }

    let total: usize = runs.iter().map(|r| r.records.len()).sum();
    let gated: usize = runs
        .iter()
        .map(|r| r.records.iter().filter(|x| x.gated).count())
        .sum();
    let alarm_count: usize = runs.iter().map(|r| r.alarms.len()).sum();
    println!(
        "classified {total} epochs ({gated} gated) across {} channel(s); {alarm_count} alarm transition(s)",
        runs.len()
    );
    println!("outputs in {}", out_dir.display());
    for run in &runs {
        for (t, alarm) in &run.alarms {
            println!("  t={t:.2}s channel {}: {alarm}", run.channel);
        }
    }
    Ok(())
}
