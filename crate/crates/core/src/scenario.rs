//! Synthetic accumulation and power logs for end-to-end exercises.
//!
//! A scenario is a timeline of interference segments over one tracking
//! channel. The generator emits the same artifacts a receiver front-end
//! would: a high-rate complex accumulation log over the configured tap grid
//! (noise scaled for the shorter per-record interval) and a band-power log
//! whose epochs align with the block centers that decimation will produce,
//! so round trips through the ingest pipeline are exact in time.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::correlator::{
    multi_access_density, noise_sigma, pbar_m_for_case, ChannelConfig, InterferenceParams,
    PowerCase, SnapshotScale, TapNoise,
};
use crate::error::Result;
use crate::ingest::{AccumRecord, AccumulationLog, PowerLog};
use crate::observables::{mean_power_watts, power_ensemble};

/// One interference episode; the code offset ramps linearly across it.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub eta: f64,
    pub dtau_start: f64,
    pub dtau_end: f64,
    pub dtheta: f64,
    pub case: PowerCase,
}

impl Segment {
    fn theta_at(&self, t: f64) -> InterferenceParams {
        let span = (self.t_end_s - self.t_start_s).max(f64::MIN_POSITIVE);
        let a = ((t - self.t_start_s) / span).clamp(0.0, 1.0);
        InterferenceParams {
            eta: self.eta,
            delta_tau: self.dtau_start + a * (self.dtau_end - self.dtau_start),
            delta_theta: self.dtheta,
        }
    }
}

/// A scripted single-channel interference timeline.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub duration_s: f64,
    pub accum_rate_hz: f64,
    pub channel: usize,
    /// Non-overlapping interference episodes; gaps are interference-free.
    pub segments: Vec<Segment>,
}

impl Scenario {
    pub fn clean(duration_s: f64) -> Self {
        Self {
            duration_s,
            accum_rate_hz: 100.0,
            channel: 0,
            segments: Vec::new(),
        }
    }

    /// Carry-off spoofing: the spoofer appears code-aligned at `t_on`,
    /// holds until `t_pull`, then drags the code offset out to
    /// `dtau_final` chips by `t_end`, staying on afterwards.
    pub fn pull_off(
        duration_s: f64,
        t_on: f64,
        t_pull: f64,
        t_end: f64,
        eta: f64,
        dtheta: f64,
        dtau_final: f64,
    ) -> Self {
        Self {
            duration_s,
            accum_rate_hz: 100.0,
            channel: 0,
            segments: vec![
                Segment {
                    t_start_s: t_on,
                    t_end_s: t_pull,
                    eta,
                    dtau_start: 0.0,
                    dtau_end: 0.0,
                    dtheta,
                    case: PowerCase::CoherentEnsemble,
                },
                Segment {
                    t_start_s: t_pull,
                    t_end_s: t_end,
                    eta,
                    dtau_start: 0.0,
                    dtau_end: dtau_final,
                    dtheta,
                    case: PowerCase::CoherentEnsemble,
                },
                Segment {
                    t_start_s: t_end,
                    t_end_s: duration_s,
                    eta,
                    dtau_start: dtau_final,
                    dtau_end: dtau_final,
                    dtheta,
                    case: PowerCase::CoherentEnsemble,
                },
            ],
        }
    }

    /// Structured-signal jamming switching on at `t_on`.
    pub fn jamming(duration_s: f64, t_on: f64, eta: f64) -> Self {
        Self {
            duration_s,
            accum_rate_hz: 100.0,
            channel: 0,
            segments: vec![Segment {
                t_start_s: t_on,
                t_end_s: duration_s,
                eta,
                dtau_start: 5.0,
                dtau_end: 5.0,
                dtheta: 1.0,
                case: PowerCase::NoncoherentEnsemble,
            }],
        }
    }

    fn active_at(&self, t: f64) -> Option<&Segment> {
        self.segments
            .iter()
            .find(|s| t >= s.t_start_s && t < s.t_end_s)
    }
}

/// Generates the accumulation log and an aligned power log for a scenario.
///
/// Accumulations are drawn at `accum_rate_hz` with the tap-noise deviation
/// for the per-record interval `1/rate`; block-averaging by `decimate_factor`
/// then reproduces the detector-rate noise level. Power records land exactly
/// on the block centers of the decimated stream.
pub fn generate_logs(
    cfg: &ChannelConfig,
    scenario: &Scenario,
    decimate_factor: usize,
    seed: u64,
) -> Result<(AccumulationLog, PowerLog)> {
    cfg.validate()?;
    let rate = scenario.accum_rate_hz;
    let n_records = (scenario.duration_s * rate).round() as usize;
    let tap_noise = TapNoise::new(&cfg.tap_grid)?;
    let record_interval = 1.0 / rate;
    let clean = InterferenceParams::clean();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n_records);
    let mut noise = vec![num_complex::Complex64::new(0.0, 0.0); cfg.tap_grid.len()];
    for k in 0..n_records {
        let t = k as f64 * record_interval;
        let (theta, case) = match scenario.active_at(t) {
            Some(seg) => (seg.theta_at(t), seg.case),
            None => (clean, PowerCase::CleanOrSingleTarget),
        };
        let scale = SnapshotScale::for_case(&theta, cfg, case)?;
        // Noise for the short per-record accumulation interval.
        let p_bar_m = pbar_m_for_case(case, cfg.p_a_watts(), &theta);
        let m0 = multi_access_density(cfg.m_s, p_bar_m, cfg.tau_c_s);
        let sigma_rec = noise_sigma(cfg.n0_dbw_hz, m0, record_interval)?;
        tap_noise.draw(sigma_rec, &mut rng, &mut noise);
        let noiseless = scale.noiseless(&theta, cfg);
        let values = noiseless
            .iter()
            .zip(&noise)
            .map(|(v, n)| (v + n) * scale.beta_k)
            .collect();
        records.push(AccumRecord { t_s: t, values });
    }
    let accum = AccumulationLog {
        channel: scenario.channel,
        rate_hz: rate,
        taps: cfg.tap_grid.clone(),
        records,
    };

    // Power epochs at the block centers decimation will produce, computed
    // with the same arithmetic so the timestamps match bit-for-bit.
    let n_blocks = n_records / decimate_factor;
    let block_interval = decimate_factor as f64 * record_interval;
    let mut power_records = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let chunk = &accum.records[b * decimate_factor..(b + 1) * decimate_factor];
        let t = chunk.iter().map(|r| r.t_s).sum::<f64>() / decimate_factor as f64;
        let (theta, case) = match scenario.active_at(t) {
            Some(seg) => (seg.theta_at(t), seg.case),
            None => (clean, PowerCase::CleanOrSingleTarget),
        };
        let ensemble = power_ensemble(cfg, &theta, case);
        let mean_w = mean_power_watts(cfg, &ensemble)?;
        let p_dbw = crate::observables::sample_power_db(mean_w, 1.0, cfg.sigma_p_db, &mut rng)?;
        power_records.push((t, p_dbw));
    }
    let power = PowerLog {
        rate_hz: 1.0 / block_interval,
        w_p_hz: cfg.w_p_hz,
        records: power_records,
    };
    Ok((accum, power))
}
