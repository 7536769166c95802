//! End-to-end properties of the region-building pipeline.

mod common;
use pd_core::cost::{uniform_cost, CostModel};
use pd_core::observables::Observation;
use pd_core::priors::{Hypothesis, PriorConfig};
use pd_core::regions::{
    bayes_risk, build_regions, generate_samples, initial_partition, read_region_file, refine,
    write_region_file, GridSpec, SampleSet, ThetaRecord,
};
use pd_core::{ChannelConfig, InterferenceParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn small_channel() -> ChannelConfig {
    ChannelConfig {
        tap_grid: ChannelConfig::spaced_taps(0.15, 7),
        ..ChannelConfig::default()
    }
}

/// Two overlapping Gaussian classes with a known likelihood-ratio boundary.
struct TwoClassProblem {
    samples: SampleSet,
    spec: GridSpec,
    mu: [[f64; 2]; 2],
    sigma: [f64; 2],
}

fn two_class_problem(n_per_class: usize, seed: u64) -> TwoClassProblem {
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
    TwoClassProblem {
        samples: SampleSet { records },
        spec,
        mu,
        sigma,
    }
}

/// Analytic Bayes boundary column for one grid row: decide class 0 when
/// `C10 pi0 p0(z) > C01 pi1 p1(z)`; with equal priors the threshold is
/// `ln(C01/C10)` on the log-likelihood ratio.
fn analytic_boundary_d(problem: &TwoClassProblem, p: f64) -> f64 {
    let c = uniform_cost();
    let threshold = (c.get(Hypothesis::Clean, Hypothesis::Multipath)
        / c.get(Hypothesis::Multipath, Hypothesis::Clean))
    .ln();
    let [sd, sp] = problem.sigma;
    let [m0, m1] = problem.mu;
    // log p0 - log p1 = threshold, linear in d for shared covariance.
    // ((d-m1d)^2 - (d-m0d)^2)/(2 sd^2) + ((p-m1p)^2 - (p-m0p)^2)/(2 sp^2) = threshold
    let dp_term = ((p - m1[1]).powi(2) - (p - m0[1]).powi(2)) / (2.0 * sp * sp);
    // ((d-m1d)^2 - (d-m0d)^2) = -2 d (m1d - m0d) + m1d^2 - m0d^2
    let a = -(m1[0] - m0[0]) / (sd * sd);
    let b = (m1[0] * m1[0] - m0[0] * m0[0]) / (2.0 * sd * sd);
    (threshold - dp_term - b) / a
}

#[test]
fn gaussian_two_class_boundary_matches_likelihood_ratio() {
    let problem = two_class_problem(200_000, 200);
    let grid = initial_partition(&problem.spec, &problem.samples).unwrap();
    let (refined, report) = refine(&grid, &problem.samples, &CostModel::Uniform).unwrap();
    assert!(report.final_risk <= report.initial_risk);

    for row in 0..problem.spec.n_p {
        let (_, p_center) = problem.spec.center(0, row);
        let d_star = analytic_boundary_d(&problem, p_center);
        let analytic_col = ((d_star - problem.spec.d_min) / problem.spec.cell_width()) as i64;
        // First column labeled class 1, scanning rightward.
        let mut transition = problem.spec.n_d as i64;
        for col in 0..problem.spec.n_d {
            if refined.label_at(col, row) == Hypothesis::Multipath {
                transition = col as i64;
                break;
            }
        }
        assert!(
            (transition - analytic_col).abs() <= 2,
            "row {row}: transition col {transition}, analytic {analytic_col}"
        );
    }
}

#[test]
fn refine_bookkeeping_agrees_with_brute_force_on_32x32() {
    let problem = two_class_problem(30_000, 201);
    let grid = initial_partition(&problem.spec, &problem.samples).unwrap();
    let initial_brute = bayes_risk(&grid, &problem.samples, &CostModel::Uniform);
    let (refined, report) = refine(&grid, &problem.samples, &CostModel::Uniform).unwrap();
    assert!((report.initial_risk - initial_brute).abs() <= 1e-12 * initial_brute.max(1e-30));
    let brute = bayes_risk(&refined, &problem.samples, &CostModel::Uniform);
    assert!(
        (refined.risk - brute).abs() <= 1e-12 * brute.max(1e-30),
        "incremental {} vs brute {}",
        refined.risk,
        brute
    );
    for w in report.risk_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-15);
    }
}

#[test]
fn per_cell_risk_delta_matches_full_recomputation() {
    // Relabeling one cell changes the risk by exactly the summed cost
    // difference of the samples it contains.
    let problem = two_class_problem(5_000, 202);
    let grid = initial_partition(&problem.spec, &problem.samples).unwrap();
    let base = bayes_risk(&grid, &problem.samples, &CostModel::Uniform);
    let total = problem.samples.total_observations() as f64;

    let mut flipped = grid.clone();
    let idx = problem.spec.index(16, 16);
    let old = flipped.labels[idx];
    let new = if old == 0 { 1 } else { 0 };
    flipped.labels[idx] = new;
    let brute = bayes_risk(&flipped, &problem.samples, &CostModel::Uniform);

    // Oracle delta: walk the samples directly.
    let mut delta = 0.0;
    for r in &problem.samples.records {
        let cost_old = CostModel::Uniform.cost(
            Hypothesis::from_index(old as usize).unwrap(),
            &r.theta,
            r.hypothesis,
        );
        let cost_new = CostModel::Uniform.cost(
            Hypothesis::from_index(new as usize).unwrap(),
            &r.theta,
            r.hypothesis,
        );
        for z in &r.observations {
            let (c, w) = problem.spec.cell_of(z);
            if problem.spec.index(c, w) == idx {
                delta += cost_new - cost_old;
            }
        }
    }
    let expected = base + delta / total;
    assert!(
        (brute - expected).abs() <= 1e-12 * brute.max(1e-30),
        "brute {brute} vs expected {expected}"
    );
}

#[test]
fn build_is_deterministic_byte_for_byte() {
    let priors = PriorConfig::default();
    let cfg = small_channel();
    let spec = GridSpec::default();
    let cost = CostModel::ThetaDependent {
        tau_dll: cfg.tau_dll,
    };
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let (grid, _) = build_regions(&priors, &cfg, &cost, &spec, 4_000, 4, 31).unwrap();
        let mut buf = Vec::new();
        write_region_file(&mut buf, &grid).unwrap();
        bytes.push(buf);
    }
    assert_eq!(bytes[0], bytes[1]);

    // And the file parses back to the same grid.
    let grid = read_region_file(std::io::Cursor::new(&bytes[0]), "mem").unwrap();
    let mut out = Vec::new();
    write_region_file(&mut out, &grid).unwrap();
    assert_eq!(out, bytes[0]);
}

#[test]
fn default_run_layout_matches_expected_geometry() {
    // A reduced-size default build still shows the qualitative layout:
    // clean near the origin, spoofing at high distortion, jamming at high
    // power with low distortion.
    let priors = PriorConfig::default();
    let cfg = small_channel();
    let spec = GridSpec::default();
    let cost = CostModel::ThetaDependent {
        tau_dll: cfg.tau_dll,
    };
    let (grid, report) = build_regions(&priors, &cfg, &cost, &spec, 20_000, 5, 32).unwrap();
    assert!(report.refine.final_risk < report.refine.initial_risk);
    assert!(grid.topology_ok());

    let decide = |d: f64, p: f64| pd_core::detector::decide(&grid, &Observation { d, p });
    // Centroid of the clean cloud.
    assert_eq!(decide(0.97, 0.0), Hypothesis::Clean);
    // High distortion at near-nominal power is spoofing territory.
    assert_eq!(decide(25.0, 0.3), Hypothesis::Spoofing);
    // High power with no distortion is jamming territory.
    assert_eq!(decide(1.0, 12.0), Hypothesis::Jamming);
}

#[test]
fn risk_decreases_from_a_misplaced_boundary() {
    // Start from a legal but badly placed vertical split; refinement must
    // walk the boundary toward the optimum, strictly reducing risk and
    // preserving simple connectivity throughout.
    let problem = two_class_problem(20_000, 203);
    let mut grid = initial_partition(&problem.spec, &problem.samples).unwrap();
    for row in 0..problem.spec.n_p {
        for col in 0..problem.spec.n_d {
            grid.labels[problem.spec.index(col, row)] = if col < 5 { 0 } else { 1 };
        }
    }
    assert!(grid.topology_ok());
    let (refined, report) = refine(&grid, &problem.samples, &CostModel::Uniform).unwrap();
    assert!(report.final_risk < report.initial_risk);
    assert!(refined.topology_ok());
    // The boundary must have moved well away from the bad start toward the
    // analytic split near column 15.
    let mid_row = problem.spec.n_p / 2;
    let mut transition = problem.spec.n_d;
    for col in 0..problem.spec.n_d {
        if refined.label_at(col, mid_row) == Hypothesis::Multipath {
            transition = col;
            break;
        }
    }
    assert!(
        (13..=18).contains(&transition),
        "transition col {transition}"
    );
}

#[test]
fn generate_samples_is_thread_count_invariant() {
    // The per-record stream layout makes results independent of rayon's
    // scheduling; spot-check by comparing against a serial pool.
    let priors = PriorConfig::default();
    let cfg = small_channel();
    let par = generate_samples(&priors, &cfg, 500, 2, 55).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let ser = pool.install(|| generate_samples(&priors, &cfg, 500, 2, 55).unwrap());
    for (a, b) in par.records.iter().zip(&ser.records) {
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.observations, b.observations);
    }
}
