//! The two detector observables: received power `P` and symmetric
//! difference `D`.
//!
//! `P` is the total band power in dB relative to the interference-free mean,
//! modeled Gaussian about the ensemble mean-power equation. `D` is the
//! modulus of the complex difference between the early and late
//! symmetric-difference taps, scaled by the interference-free noise
//! deviation `σ_N0`; with no coherent interaction it is Rayleigh. Together
//! they form the observation vector `z = [D, P]` that the decision regions
//! partition.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::correlator::{
    self, autocorr, multi_access_density, noise_sigma, ChannelConfig, CorrelationSnapshot,
    InterferenceParams, PowerCase,
};
use crate::error::{Error, Result};
use crate::priors::{Hypothesis, PriorConfig};

/// One per-channel observation pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// Symmetric difference (dimensionless, >= 0).
    pub d: f64,
    /// Received power (dB relative to the interference-free mean).
    pub p: f64,
}

/// Observations from several tracking channels sharing one power measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelObservation {
    pub d_per_channel: Vec<f64>,
    pub p: f64,
}

impl MultiChannelObservation {
    pub fn new(d_per_channel: Vec<f64>, p: f64) -> Result<Self> {
        if d_per_channel.is_empty() {
            return Err(Error::InvalidParameter(
                "multi-channel observation needs at least one channel".into(),
            ));
        }
        Ok(Self { d_per_channel, p })
    }
}

/// Per-signal contribution to the total received power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalPower {
    /// Authentic received power of this signal (W).
    pub p_a_w: f64,
    /// Interference-to-authentic power ratio on this signal (linear).
    pub eta: f64,
    /// Interference code offset (chips).
    pub delta_tau: f64,
    /// Interference carrier offset (radians).
    pub delta_theta: f64,
}

impl SignalPower {
    pub fn clean(p_a_w: f64) -> Self {
        Self {
            p_a_w,
            eta: 0.0,
            delta_tau: 0.0,
            delta_theta: 0.0,
        }
    }
}

/// Builds the per-signal ensemble for the given mean-power case.
///
/// * clean-or-single-target — the target channel carries `theta`, the other
///   `M_s` signals are clean;
/// * non-coherent ensemble — every signal carries power ratio `η` with the
///   carrier offset set to quadrature so the coherent cross-term drops;
/// * coherent ensemble — every signal carries `theta` as-is.
pub fn power_ensemble(
    cfg: &ChannelConfig,
    theta: &InterferenceParams,
    case: PowerCase,
) -> Vec<SignalPower> {
    let p_a = cfg.p_a_watts();
    let n = cfg.m_s as usize + 1;
    match case {
        PowerCase::CleanOrSingleTarget => {
            let mut v = vec![SignalPower::clean(p_a); n];
            v[0] = SignalPower {
                p_a_w: p_a,
                eta: theta.eta,
                delta_tau: theta.delta_tau,
                delta_theta: theta.delta_theta,
            };
            v
        }
        PowerCase::NoncoherentEnsemble => vec![
            SignalPower {
                p_a_w: p_a,
                eta: theta.eta,
                delta_tau: theta.delta_tau,
                delta_theta: std::f64::consts::FRAC_PI_2,
            };
            n
        ],
        PowerCase::CoherentEnsemble => vec![
            SignalPower {
                p_a_w: p_a,
                eta: theta.eta,
                delta_tau: theta.delta_tau,
                delta_theta: theta.delta_theta,
            };
            n
        ],
    }
}

/// Total mean received power in the measurement band:
/// `Σ_i [(1+η_i)P_Ai + 2√η_i P_Ai cos(Δθ_i) R(Δτ_i)] + N_0 W_P`.
pub fn mean_power_watts(cfg: &ChannelConfig, ensemble: &[SignalPower]) -> Result<f64> {
    if ensemble.len() != cfg.m_s as usize + 1 {
        return Err(Error::Mismatch(format!(
            "power ensemble must list M_s + 1 = {} signals, got {}",
            cfg.m_s + 1,
            ensemble.len()
        )));
    }
    let mut total = cfg.n0_watts_hz() * cfg.w_p_hz;
    for s in ensemble {
        total += (1.0 + s.eta) * s.p_a_w
            + 2.0 * s.eta.sqrt() * s.p_a_w * s.delta_theta.cos() * autocorr(s.delta_tau);
    }
    Ok(total)
}

/// Mean received power with every signal clean; the 0-dB reference.
pub fn h0_mean_power_watts(cfg: &ChannelConfig) -> f64 {
    (cfg.m_s as f64 + 1.0) * cfg.p_a_watts() + cfg.n0_watts_hz() * cfg.w_p_hz
}

/// Draws one power measurement in dB relative to `ref_w`.
pub fn sample_power_db<R: Rng + ?Sized>(
    mean_w: f64,
    ref_w: f64,
    sigma_p_db: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(mean_w > 0.0) || !(ref_w > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "powers must be positive, got mean={mean_w}, ref={ref_w}"
        )));
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(10.0 * (mean_w / ref_w).log10() + sigma_p_db * z)
}

/// Symmetric difference `D = |ξ(-τ_d) - ξ(+τ_d)| / σ_N0`.
pub fn symmetric_difference(snap: &CorrelationSnapshot, tau_d: f64, sigma_n0: f64) -> Result<f64> {
    if !(sigma_n0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_n0 must be positive, got {sigma_n0}"
        )));
    }
    let early = snap
        .value_at(-tau_d)
        .ok_or_else(|| Error::Mismatch(format!("snapshot has no tap at {} chips", -tau_d)))?;
    let late = snap
        .value_at(tau_d)
        .ok_or_else(|| Error::Mismatch(format!("snapshot has no tap at {tau_d} chips")))?;
    Ok((early - late).norm() / sigma_n0)
}

/// Variance of the scaled complex tap difference when there is no coherent
/// interaction: `σ_d² = 8 τ_d (β_k σ_N / σ_N0)²`.
///
/// This is the total complex variance, i.e. `E[D²]`; each quadrature of the
/// difference carries half of it, and `D` is then Rayleigh with
/// `P(D <= x) = 1 - exp(-x²/σ_d²)`.
pub fn rayleigh_sigma_d(tau_d: f64, beta_k: f64, sigma_n: f64, sigma_n0: f64) -> f64 {
    let r = beta_k * sigma_n / sigma_n0;
    8.0 * tau_d * r * r
}

/// Reusable observation simulator for one channel configuration.
///
/// Caches the tap-noise Cholesky factor and the interference-free
/// references (`P_H0`, `σ_N0`), which are shared across all draws.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ChannelConfig,
    tap_noise: correlator::TapNoise,
    p_h0_w: f64,
    sigma_n0: f64,
}

impl Simulator {
    pub fn new(cfg: &ChannelConfig) -> Result<Self> {
        cfg.validate()?;
        let tap_noise = correlator::TapNoise::new(&cfg.tap_grid)?;
        let p_h0_w = h0_mean_power_watts(cfg);
        let m0_h0 = multi_access_density(cfg.m_s, cfg.p_a_watts(), cfg.tau_c_s);
        let sigma_n0 = noise_sigma(cfg.n0_dbw_hz, m0_h0, cfg.accum_t_s)?;
        Ok(Self {
            cfg: cfg.clone(),
            tap_noise,
            p_h0_w,
            sigma_n0,
        })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    /// Interference-free tap noise deviation σ_N0.
    pub fn sigma_n0(&self) -> f64 {
        self.sigma_n0
    }

    /// Interference-free mean received power (W); the 0-dB reference.
    pub fn p_h0_watts(&self) -> f64 {
        self.p_h0_w
    }

    /// Mean-power case used for observations under each hypothesis: the
    /// target channel alone carries multipath, an ensemble spoofer hits all
    /// channels coherently (configurable), and jamming adds non-coherent
    /// power everywhere.
    pub fn power_case(&self, hypothesis: Hypothesis) -> PowerCase {
        match hypothesis {
            Hypothesis::Clean | Hypothesis::Multipath => PowerCase::CleanOrSingleTarget,
            Hypothesis::Spoofing => self.cfg.spoof_power_case,
            Hypothesis::Jamming => PowerCase::NoncoherentEnsemble,
        }
    }

    /// One correlation snapshot under `theta` with the given power case.
    pub fn snapshot<R: Rng + ?Sized>(
        &self,
        theta: &InterferenceParams,
        case: PowerCase,
        rng: &mut R,
    ) -> Result<CorrelationSnapshot> {
        let batch = self.snapshot_batch(theta, case, 1, rng)?;
        Ok(batch.into_iter().next().unwrap())
    }

    fn snapshot_batch<R: Rng + ?Sized>(
        &self,
        theta: &InterferenceParams,
        case: PowerCase,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<CorrelationSnapshot>> {
        let scale = correlator::SnapshotScale::for_case(theta, &self.cfg, case)?;
        let noiseless = scale.noiseless(theta, &self.cfg);
        let mut out = Vec::with_capacity(count);
        let mut noise = vec![num_complex::Complex64::new(0.0, 0.0); self.cfg.tap_grid.len()];
        for _ in 0..count {
            self.tap_noise.draw(scale.sigma_n, rng, &mut noise);
            let values = noiseless
                .iter()
                .zip(&noise)
                .map(|(v, n)| (v + n) * scale.beta_k)
                .collect();
            out.push(CorrelationSnapshot {
                lags: self.cfg.tap_grid.clone(),
                values,
                beta_k: scale.beta_k,
                sigma_n: scale.sigma_n,
            });
        }
        Ok(out)
    }

    /// Draws `count` independent observations under `theta`. The code-phase
    /// estimate, AGC gain, and noise scale are computed once per `theta`.
    pub fn observe_batch<R: Rng + ?Sized>(
        &self,
        theta: &InterferenceParams,
        hypothesis: Hypothesis,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Observation>> {
        let case = self.power_case(hypothesis);
        let ensemble = power_ensemble(&self.cfg, theta, case);
        let mean_w = mean_power_watts(&self.cfg, &ensemble)?;
        let snaps = self.snapshot_batch(theta, case, count, rng)?;
        let mut out = Vec::with_capacity(count);
        for snap in snaps {
            let d = symmetric_difference(&snap, self.cfg.tau_d, self.sigma_n0)?;
            let p = sample_power_db(mean_w, self.p_h0_w, self.cfg.sigma_p_db, rng)?;
            out.push(Observation { d, p });
        }
        Ok(out)
    }
}

/// Simulates one observation under `theta`; `hypothesis` selects the
/// mean-power ensemble.
///
/// Prefer [`Simulator`] for bulk draws — this convenience wrapper rebuilds
/// the cached factors on every call.
pub fn simulate_observation<R: Rng + ?Sized>(
    theta: &InterferenceParams,
    hypothesis: Hypothesis,
    cfg: &ChannelConfig,
    priors: &PriorConfig,
    rng: &mut R,
) -> Result<Observation> {
    debug_assert_eq!(crate::priors::membership(theta, priors), hypothesis);
    let sim = Simulator::new(cfg)?;
    Ok(sim.observe_batch(theta, hypothesis, 1, rng)?[0])
}

/// One tagged row of an observation batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationRow {
    pub hypothesis: Hypothesis,
    pub theta: InterferenceParams,
    pub observation: Observation,
}

/// Writes an observation batch as CSV: `hyp,eta,dtau,dtheta,D,P`, one row
/// per draw, preceded by a `# seed=<seed>` provenance comment.
pub fn write_observations_csv<W: Write>(
    w: &mut W,
    seed: u64,
    rows: impl Iterator<Item = ObservationRow>,
) -> Result<()> {
    writeln!(w, "# seed={seed}")?;
    writeln!(w, "hyp,eta,dtau,dtheta,D,P")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.hypothesis.index(),
            r.theta.eta,
            r.theta.delta_tau,
            r.theta.delta_theta,
            r.observation.d,
            r.observation.p
        )?;
    }
    Ok(())
}

/// Reads an observation CSV, returning the recorded seed (if any) and rows.
pub fn read_observations_csv<R: BufRead>(
    r: R,
    path: &str,
) -> Result<(Option<u64>, Vec<ObservationRow>)> {
    let mut seed = None;
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let parse_err = |msg: String| Error::Parse {
            path: path.to_string(),
            line: lineno,
            msg,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(s) = comment.trim().strip_prefix("seed=") {
                seed = s.trim().parse().ok();
            }
            continue;
        }
        if !saw_header {
            if trimmed != "hyp,eta,dtau,dtheta,D,P" {
                return Err(parse_err(format!("unexpected header {trimmed:?}")));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_err(format!(
                "expected 6 fields, got {}",
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|e| parse_err(format!("field {}: {e}", i + 1)))
        };
        let hyp_idx: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(format!("hypothesis: {e}")))?;
        rows.push(ObservationRow {
            hypothesis: Hypothesis::from_index(hyp_idx)?,
            theta: InterferenceParams::new(num(1)?, num(2)?, num(3)?)?,
            observation: Observation {
                d: num(4)?,
                p: num(5)?,
            },
        });
    }
    if !saw_header {
        return Err(Error::Parse {
            path: path.to_string(),
            line: 0,
            msg: "missing header".into(),
        });
    }
    Ok((seed, rows))
}
