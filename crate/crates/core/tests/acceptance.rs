//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured values. Run with `--nocapture` to see them.
//!
//! The heavyweight default build (1e5 parameter draws, 20 observations
//! each, the nominal channel) is shared across criteria through a lazy
//! static so the suite stays within a desk-scale budget.

mod common;

use std::sync::OnceLock;

use common::*;
use pd_core::cost::CostModel;
use pd_core::detector::{self, Alarm, WindowVote};
use pd_core::ingest::{
    align_power, decimate, estimate_sigma_n0, excise_interference, observations_from_log,
};
use pd_core::observables::{h0_mean_power_watts, mean_power_watts, power_ensemble, Observation};
use pd_core::priors::{mu_of_elevation, sample_theta, Hypothesis, PriorConfig};
use pd_core::regions::{
    bayes_risk, build_regions, generate_samples, initial_partition, refine, write_region_file,
    BuildReport, Grid, GridSpec, SampleSet, ThetaRecord,
};
use pd_core::scenario::{generate_logs, Scenario};
use pd_core::{ChannelConfig, InterferenceParams, PowerCase, Simulator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const BUILD_SEED: u64 = 20_260_810;
const EVAL_SEED: u64 = 987_654_321;

fn nominal_channel() -> ChannelConfig {
    // P_A = -156 dBW, N0 = -204 dBW/Hz, M_s = 7, tau_d = 0.15 chips,
    // T = 100 ms, W_P = 2 MHz, sigma_P = 0.4 dB.
    ChannelConfig::default()
}

fn default_build() -> &'static (Grid, BuildReport) {
    static BUILD: OnceLock<(Grid, BuildReport)> = OnceLock::new();
    BUILD.get_or_init(|| {
        let cfg = nominal_channel();
        build_regions(
            &PriorConfig::default(),
            &cfg,
            &CostModel::ThetaDependent {
                tau_dll: cfg.tau_dll,
            },
            &GridSpec::default(),
            100_000,
            20,
            BUILD_SEED,
        )
        .expect("default build")
    })
}

#[test]
fn criterion_1_classification_matrix_bounds() {
    let (grid, report) = default_build();
    assert_eq!(report.theta_counts, [60_000, 20_000, 5_000, 15_000]);
    assert_eq!(report.total_observations, 2_000_000);

    let cfg = nominal_channel();
    let eval = generate_samples(&PriorConfig::default(), &cfg, 100_000, 20, EVAL_SEED).unwrap();
    let pairs: Vec<(Hypothesis, Hypothesis)> = eval
        .records
        .iter()
        .flat_map(|r| {
            r.observations
                .iter()
                .map(|z| (detector::decide(grid, z), r.hypothesis))
        })
        .collect();
    let m = detector::classification_matrix(&pairs).unwrap();

    println!("criterion 1 matrix (columns = truth):");
    for (i, row) in m.iter().enumerate() {
        println!(
            "  H{i}: {:.4} {:.4} {:.4} {:.4}",
            row[0], row[1], row[2], row[3]
        );
    }
    for j in 0..4 {
        let col: f64 = m.iter().map(|row| row[j]).sum();
        assert!((col - 1.0).abs() < 1e-12, "column {j} sums to {col}");
    }

    let h0_h0 = m[0][0];
    let h3_h3 = m[3][3];
    let h2_attack = m[2][2] + m[3][2];
    let h1_attack = m[2][1] + m[3][1];
    let h2_h2 = m[2][2];
    assert!(h0_h0 >= 0.98, "H0->H0 {h0_h0} < 0.98");
    assert!(h3_h3 >= 0.95, "H3->H3 {h3_h3} < 0.95");
    assert!(h2_attack >= 0.88, "H2 detected {h2_attack} < 0.88");
    assert!(h1_attack <= 0.03, "H1->attack {h1_attack} > 0.03");
    assert!(h2_h2 >= 0.80, "H2->H2 {h2_h2} < 0.80");

    // Spot anchors on the built default grid: the clean-cloud centroid,
    // high distortion at near-nominal power, and high power at low
    // distortion.
    let decide = |d: f64, p: f64| detector::decide(grid, &Observation { d, p });
    assert_eq!(decide(0.97, 0.0), Hypothesis::Clean);
    assert_eq!(decide(25.0, 0.3), Hypothesis::Spoofing);
    assert_eq!(decide(1.0, 12.0), Hypothesis::Jamming);
    println!(
        "ACCEPTANCE 1 PASS: H0->H0 {h0_h0:.4} (>=0.98), H3->H3 {h3_h3:.4} (>=0.95), \
         H2->attack {h2_attack:.4} (>=0.88), H1->attack {h1_attack:.4} (<=0.03), \
         H2->H2 {h2_h2:.4} (>=0.80)"
    );
}

#[test]
fn criterion_2_rayleigh_law_under_h0() {
    let cfg = nominal_channel();
    let sim = Simulator::new(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2_001);
    let obs = sim
        .observe_batch(
            &InterferenceParams::clean(),
            Hypothesis::Clean,
            100_000,
            &mut rng,
        )
        .unwrap();
    let mut d: Vec<f64> = obs.iter().map(|z| z.d).collect();

    let sigma_d2 = d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64;
    let target = 8.0 * cfg.tau_d;
    assert!(
        (sigma_d2 - target).abs() / target < 0.02,
        "sigma_d^2 {sigma_d2} vs {target}"
    );

    let ks = ks_statistic(&mut d, |x| rayleigh_cdf(x, 1.2));
    let crit = ks_critical_001(d.len());
    assert!(ks < crit, "KS {ks} >= {crit}");
    println!(
        "ACCEPTANCE 2 PASS: sigma_d^2 {sigma_d2:.4} within 2% of {target}, KS {ks:.5} < {crit:.5}"
    );
}

#[test]
fn criterion_3_power_model() {
    let cfg = nominal_channel();
    let sim = Simulator::new(&cfg).unwrap();
    let p_h0 = h0_mean_power_watts(&cfg);

    let mut worst: f64 = 0.0;
    let cases = [
        (InterferenceParams::clean(), Hypothesis::Clean, 3_001),
        (
            InterferenceParams::new(0.4, 0.5, 2.0).unwrap(),
            Hypothesis::Multipath,
            3_002,
        ),
        (
            InterferenceParams::new(1.5, 0.25, 0.9).unwrap(),
            Hypothesis::Spoofing,
            3_003,
        ),
        (
            InterferenceParams::new(7.0, 4.5, 0.0).unwrap(),
            Hypothesis::Jamming,
            3_004,
        ),
    ];
    for (theta, hyp, seed) in cases {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs = sim.observe_batch(&theta, hyp, 100_000, &mut rng).unwrap();
        let mean_p = mean(&obs.iter().map(|z| z.p).collect::<Vec<_>>());
        let ens = power_ensemble(&cfg, &theta, sim.power_case(hyp));
        let model = 10.0 * (mean_power_watts(&cfg, &ens).unwrap() / p_h0).log10();
        let err = (mean_p - model).abs();
        worst = worst.max(err);
        assert!(err < 0.02, "{hyp}: mean P off by {err} dB");
    }

    // Destructive coherent alignment: eta = 4, dtheta = pi, dtau = 0. The
    // coherent term is negative and cancels the interferer's 4 P_A exactly,
    // pulling the mean well below the non-coherent (1+eta) level.
    let destructive = InterferenceParams::new(4.0, 0.0, std::f64::consts::PI).unwrap();
    let ens = power_ensemble(&cfg, &destructive, PowerCase::CleanOrSingleTarget);
    let w = mean_power_watts(&cfg, &ens).unwrap();
    let orthogonal = InterferenceParams::new(4.0, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
    let ens_nc = power_ensemble(&cfg, &orthogonal, PowerCase::CleanOrSingleTarget);
    let w_nc = mean_power_watts(&cfg, &ens_nc).unwrap();
    let coherent_term = 2.0
        * 4.0f64.sqrt()
        * cfg.p_a_watts()
        * std::f64::consts::PI.cos()
        * pd_core::correlator::autocorr(0.0);
    assert!(
        coherent_term < 0.0,
        "coherent term {coherent_term} not negative"
    );
    assert!(
        w < w_nc && (w - p_h0).abs() < 1e-12 * p_h0,
        "destructive mean {w} should cancel back to the clean level {p_h0}"
    );
    println!(
        "ACCEPTANCE 3 PASS: worst per-hypothesis mean-power error {worst:.4} dB (< 0.02), \
         destructive coherent term {:.3e} W (negative), {:.2} dB below the non-coherent level",
        coherent_term,
        10.0 * (w_nc / w).log10()
    );
}

#[test]
fn criterion_4_prior_marginals() {
    let cfg = PriorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4_001);
    let draws: Vec<InterferenceParams> = (0..1_000_000)
        .map(|_| sample_theta(Hypothesis::Multipath, &cfg, &mut rng).unwrap())
        .collect();
    let eta_db: Vec<f64> = draws.iter().map(|t| 10.0 * t.eta.log10()).collect();
    let dtau: Vec<f64> = draws.iter().map(|t| t.delta_tau).collect();
    let m = mean(&eta_db);
    let s = std_dev(&eta_db);
    let r = pearson(&eta_db, &dtau);
    assert!((m - (-21.0)).abs() < 0.05, "mean {m}");
    assert!((s - 5.0).abs() < 0.05, "std {s}");
    assert!((r - (-0.23)).abs() < 0.02, "correlation {r}");

    assert_eq!(mu_of_elevation(20.0), 90.8);
    assert_eq!(mu_of_elevation(50.0), 44.0);
    assert!((mu_of_elevation(80.0) - 18.8).abs() < 1e-12);
    println!(
        "ACCEPTANCE 4 PASS: eta dB mean {m:.3} (+-0.05 of -21), std {s:.3} (+-0.05 of 5), \
         corr {r:.3} (+-0.02 of -0.23), mu spot values exact"
    );
}

#[test]
fn criterion_5_optimizer_properties() {
    // Non-increasing risk and connectivity on the default run.
    let (grid, report) = default_build();
    for w in report.refine.risk_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-15, "risk increased across sweeps");
    }
    assert!(report.refine.final_risk <= report.refine.initial_risk);
    assert!(grid.topology_ok());

    // Incremental bookkeeping against brute force on a 32x32 synthetic.
    let problem = gaussian_problem(30_000, 5_001);
    let initial = initial_partition(&problem.spec, &problem.samples).unwrap();
    let (refined, _) = refine(&initial, &problem.samples, &CostModel::Uniform).unwrap();
    let brute = bayes_risk(&refined, &problem.samples, &CostModel::Uniform);
    let rel = (refined.risk - brute).abs() / brute.max(1e-30);
    assert!(rel <= 1e-12, "incremental vs brute relative error {rel}");

    // Byte-identical region files across two runs at the same seed.
    let cfg = nominal_channel();
    let rerun = build_regions(
        &PriorConfig::default(),
        &cfg,
        &CostModel::ThetaDependent {
            tau_dll: cfg.tau_dll,
        },
        &GridSpec::default(),
        100_000,
        20,
        BUILD_SEED,
    )
    .unwrap()
    .0;
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_region_file(&mut a, grid).unwrap();
    write_region_file(&mut b, &rerun).unwrap();
    assert_eq!(a, b, "region files differ across identical runs");
    println!(
        "ACCEPTANCE 5 PASS: risk {:.6} -> {:.6} non-increasing over {} sweeps, \
         incremental-vs-brute rel err {rel:.2e} (<=1e-12), byte-identical rebuild ({} bytes)",
        report.refine.initial_risk,
        report.refine.final_risk,
        report.refine.sweeps,
        a.len()
    );
}

struct GaussianProblem {
    samples: SampleSet,
    spec: GridSpec,
    mu: [[f64; 2]; 2],
    sigma: [f64; 2],
}

fn gaussian_problem(n_per_class: usize, seed: u64) -> GaussianProblem {
    let spec = GridSpec {
        d_min: 0.0,
        d_max: 32.0,
        n_d: 32,
        p_min: -4.0,
        p_max: 4.0,
        n_p: 32,
    };
    // Truncating both classes to the grid box keeps every row densely
    // populated; the mirror-symmetric design gives equal truncation
    // constants, so the analytic likelihood-ratio boundary is unchanged.
    let mu = [[12.0, -0.5], [20.0, 0.5]];
    let sigma = [2.5, 2.0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for (class, hyp) in [(0usize, Hypothesis::Clean), (1, Hypothesis::Multipath)] {
        let nd = Normal::new(mu[class][0], sigma[0]).unwrap();
        let np = Normal::new(mu[class][1], sigma[1]).unwrap();
        let theta = if class == 0 {
            InterferenceParams::clean()
        } else {
            InterferenceParams::new(0.5, 0.3, 1.0).unwrap()
        };
        let mut kept = 0;
        while kept < n_per_class {
            let d: f64 = nd.sample(&mut rng);
            let p: f64 = np.sample(&mut rng);
            if d < spec.d_min || d > spec.d_max || p < spec.p_min || p > spec.p_max {
                continue;
            }
            kept += 1;
            records.push(ThetaRecord {
                theta,
                hypothesis: hyp,
                observations: vec![Observation { d, p }],
            });
        }
    }
    GaussianProblem {
        samples: SampleSet { records },
        spec,
        mu,
        sigma,
    }
}

#[test]
fn criterion_6_gaussian_two_class_oracle() {
    let problem = gaussian_problem(200_000, 6_001);
    let grid = initial_partition(&problem.spec, &problem.samples).unwrap();
    let (refined, _) = refine(&grid, &problem.samples, &CostModel::Uniform).unwrap();

    // Analytic likelihood-ratio boundary with the asymmetric uniform costs
    // C01/C10 and equal priors.
    let c = pd_core::cost::uniform_cost();
    let threshold = (c.get(Hypothesis::Clean, Hypothesis::Multipath)
        / c.get(Hypothesis::Multipath, Hypothesis::Clean))
    .ln();
    let [sd, sp] = problem.sigma;
    let [m0, m1] = problem.mu;
    let mut worst = 0i64;
    for row in 0..problem.spec.n_p {
        let (_, p) = problem.spec.center(0, row);
        let dp_term = ((p - m1[1]).powi(2) - (p - m0[1]).powi(2)) / (2.0 * sp * sp);
        let a = -(m1[0] - m0[0]) / (sd * sd);
        let b = (m1[0] * m1[0] - m0[0] * m0[0]) / (2.0 * sd * sd);
        let d_star = (threshold - dp_term - b) / a;
        let analytic_col = ((d_star - problem.spec.d_min) / problem.spec.cell_width()) as i64;
        let mut transition = problem.spec.n_d as i64;
        for col in 0..problem.spec.n_d {
            if refined.label_at(col, row) == Hypothesis::Multipath {
                transition = col as i64;
                break;
            }
        }
        worst = worst.max((transition - analytic_col).abs());
        assert!(
            (transition - analytic_col).abs() <= 2,
            "row {row}: transition {transition} vs analytic {analytic_col}"
        );
    }
    println!("ACCEPTANCE 6 PASS: converged boundary within {worst} cells (<=2) on every row");
}

#[test]
fn criterion_7_ingest_round_trip_and_excision() {
    // Generator -> log text -> ingest against direct simulation.
    let cfg = ChannelConfig {
        tap_grid: ChannelConfig::spaced_taps(0.15, 7),
        ..nominal_channel()
    };
    let scenario = Scenario::clean(1000.0);
    let (accum, power) = generate_logs(&cfg, &scenario, 10, 7_001).unwrap();
    let mut accum_text = Vec::new();
    pd_core::ingest::write_accum_log(&mut accum_text, &accum).unwrap();
    let accum = pd_core::ingest::read_accum_log(std::io::Cursor::new(&accum_text), "mem").unwrap();
    drop(accum_text);

    let sigma_n0 = estimate_sigma_n0(&accum, (0.0, 1000.0)).unwrap() / 10.0f64.sqrt();
    let dec = decimate(&accum, 10).unwrap();
    let times: Vec<f64> = dec.records.iter().map(|r| r.t_s).collect();
    let aligned = align_power(&power, &times).unwrap();
    let quiet_mean = mean(&aligned.iter().flatten().copied().collect::<Vec<_>>());
    let rel: Vec<Option<f64>> = aligned.iter().map(|p| p.map(|v| v - quiet_mean)).collect();
    let obs = observations_from_log(&dec, &rel, sigma_n0, cfg.tau_d).unwrap();
    assert_eq!(obs.len(), 10_000);

    let sim = Simulator::new(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7_002);
    let direct = sim
        .observe_batch(
            &InterferenceParams::clean(),
            Hypothesis::Clean,
            10_000,
            &mut rng,
        )
        .unwrap();
    let crit = ks_two_sample_critical_001(10_000, 10_000);
    let mut d1: Vec<f64> = obs.iter().map(|(_, z)| z.d).collect();
    let mut d2: Vec<f64> = direct.iter().map(|z| z.d).collect();
    let ks_d = ks_two_sample(&mut d1, &mut d2);
    assert!(ks_d < crit, "D: KS {ks_d} >= {crit}");
    let mut p1: Vec<f64> = obs.iter().map(|(_, z)| z.p).collect();
    let mut p2: Vec<f64> = direct.iter().map(|z| z.p).collect();
    let ks_p = ks_two_sample(&mut p1, &mut p2);
    assert!(ks_p < crit, "P: KS {ks_p} >= {crit}");

    // Spike excision on a bursty +3 dB mixture.
    let mut rng = ChaCha8Rng::seed_from_u64(7_003);
    let normal = Normal::new(0.0, 0.4).unwrap();
    let n = 20_000;
    let mut series = Vec::with_capacity(n);
    let mut spike = vec![false; n];
    for (i, s) in spike.iter_mut().enumerate() {
        let base: f64 = normal.sample(&mut rng);
        if (100..140).contains(&(i % 800)) {
            *s = true;
            series.push(base + 3.0);
        } else {
            series.push(base);
        }
    }
    let result = excise_interference(&series);
    let spikes_total = spike.iter().filter(|&&s| s).count() as f64;
    let spikes_excised = spike
        .iter()
        .zip(&result.keep)
        .filter(|(&s, &k)| s && !k)
        .count() as f64;
    let clean_excised = spike
        .iter()
        .zip(&result.keep)
        .filter(|(&s, &k)| !s && !k)
        .count() as f64;
    let spike_recall = spikes_excised / spikes_total;
    let clean_loss = clean_excised / (n as f64 - spikes_total);
    assert!(spike_recall >= 0.90, "spike recall {spike_recall}");
    assert!(clean_loss < 0.02, "clean loss {clean_loss}");
    println!(
        "ACCEPTANCE 7 PASS: round-trip KS D {ks_d:.4}, P {ks_p:.4} (< {crit:.4}); \
         spike recall {spike_recall:.3} (>=0.90), clean loss {clean_loss:.4} (<0.02)"
    );
}

type TimedDecisions = Vec<(f64, Hypothesis)>;
type AlarmTransitions = Vec<(f64, Alarm)>;

/// Runs the full classify pipeline over synthetic logs, returning per-epoch
/// (time, decision) for ungated epochs and the windowed alarm transitions.
fn classify_scenario(
    grid: &Grid,
    cfg: &ChannelConfig,
    scenario: &Scenario,
    seed: u64,
) -> (TimedDecisions, AlarmTransitions) {
    let (accum, power) = generate_logs(cfg, scenario, 10, seed).unwrap();
    let sigma_n0 = estimate_sigma_n0(&accum, (0.0, 15.0)).unwrap() / 10.0f64.sqrt();
    let dec = decimate(&accum, 10).unwrap();
    let times: Vec<f64> = dec.records.iter().map(|r| r.t_s).collect();
    let aligned = align_power(&power, &times).unwrap();
    let quiet: Vec<f64> = times
        .iter()
        .zip(&aligned)
        .filter(|(t, p)| **t <= 15.0 && p.is_some())
        .map(|(_, p)| p.unwrap())
        .collect();
    let p_ref = mean(&quiet);
    let rel: Vec<Option<f64>> = aligned.iter().map(|p| p.map(|v| v - p_ref)).collect();
    let obs = observations_from_log(&dec, &rel, sigma_n0, cfg.tau_d).unwrap();

    let mut decisions = Vec::new();
    let mut voter = WindowVote::new(6, 20).unwrap();
    let mut alarms = Vec::new();
    let mut last = Alarm::None;
    for (t, z) in obs {
        let d = detector::decide(grid, &z);
        decisions.push((t, d));
        let alarm = voter.push(d);
        if alarm != last {
            alarms.push((t, alarm));
            last = alarm;
        }
    }
    (decisions, alarms)
}

#[test]
fn criterion_8_end_to_end_scenarios() {
    let (grid, _) = default_build();
    let cfg = nominal_channel();

    // Clean control: no alarms at all.
    let (_, alarms) = classify_scenario(grid, &cfg, &Scenario::clean(120.0), 8_001);
    assert!(alarms.is_empty(), "clean scenario raised {alarms:?}");

    // Carry-off spoofing: on at 120 s aligned, pull-off 180..300 s out to
    // 3 chips, then parked. Alarm must fire inside the carry-off window and
    // decisions outside it must be benign or jamming-like.
    let pull = Scenario::pull_off(
        360.0,
        120.0,
        180.0,
        300.0,
        1.3,
        std::f64::consts::FRAC_PI_2,
        3.0,
    );
    let (decisions, alarms) = classify_scenario(grid, &cfg, &pull, 8_002);
    let spoof_alarm = alarms
        .iter()
        .find(|(_, a)| *a == Alarm::Spoofing)
        .map(|(t, _)| *t);
    let t_alarm = spoof_alarm.expect("no spoofing alarm raised");
    assert!(
        (180.0..300.0).contains(&t_alarm),
        "spoofing alarm at {t_alarm}, outside the carry-off window"
    );
    assert!(
        t_alarm - 180.0 <= 10.0,
        "spoofing alarm {:.1}s after pull-off onset",
        t_alarm - 180.0
    );
    // Outside carry-off: fraction of spoofing decisions stays negligible and
    // everything else is H0 or H3 (power-only visibility of the spoofer).
    let outside: Vec<Hypothesis> = decisions
        .iter()
        .filter(|(t, _)| *t < 175.0 || *t > 310.0)
        .map(|(_, d)| *d)
        .collect();
    let spoof_frac = outside
        .iter()
        .filter(|&&d| d == Hypothesis::Spoofing)
        .count() as f64
        / outside.len() as f64;
    assert!(
        spoof_frac < 0.05,
        "H2 fraction outside carry-off {spoof_frac}"
    );
    let before: Vec<Hypothesis> = decisions
        .iter()
        .filter(|(t, _)| *t < 118.0)
        .map(|(_, d)| *d)
        .collect();
    let clean_frac =
        before.iter().filter(|&&d| d == Hypothesis::Clean).count() as f64 / before.len() as f64;
    assert!(clean_frac > 0.95, "pre-attack clean fraction {clean_frac}");

    // Cumulative-history shape: essentially all of the H2 trace's rise
    // happens inside the carry-off window.
    let traces =
        detector::cumulative_history(&decisions.iter().map(|(_, d)| *d).collect::<Vec<_>>());
    let h2_at = |time: f64| {
        let idx = decisions.partition_point(|(t, _)| *t < time);
        traces[idx.min(traces.len() - 1)][2]
    };
    let h2_final = traces.last().unwrap()[2];
    let in_window_rise = h2_at(305.0) - h2_at(178.0);
    assert!(
        h2_final > 0.0 && in_window_rise >= 0.9 * h2_final,
        "H2 trace rise {in_window_rise} of final {h2_final} outside the pull-off window"
    );

    // Jamming: immediate alarm at onset.
    let jam = Scenario::jamming(240.0, 120.0, 6.0);
    let (decisions, alarms) = classify_scenario(grid, &cfg, &jam, 8_003);
    let jam_alarm = alarms
        .iter()
        .find(|(_, a)| *a == Alarm::Jamming)
        .map(|(t, _)| *t)
        .expect("no jamming alarm raised");
    assert!(
        jam_alarm - 120.0 <= 5.0,
        "jamming alarm {:.1}s after onset",
        jam_alarm - 120.0
    );
    let during: Vec<Hypothesis> = decisions
        .iter()
        .filter(|(t, _)| *t > 125.0)
        .map(|(_, d)| *d)
        .collect();
    let jam_frac =
        during.iter().filter(|&&d| d == Hypothesis::Jamming).count() as f64 / during.len() as f64;
    assert!(jam_frac > 0.90, "jamming fraction {jam_frac}");
    println!(
        "ACCEPTANCE 8 PASS: spoofing alarm {:.1}s into pull-off (<=10s), \
         jamming alarm {:.1}s after onset (<=5s), clean control silent",
        t_alarm - 180.0,
        jam_alarm - 120.0
    );
}
