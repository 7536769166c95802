//! Models of the post-correlation complex accumulation `ξ_k(τ)`.
//!
//! A tracking channel correlates the AGC-scaled received signal against a
//! local code replica at a set of lag offsets (taps) and accumulates over an
//! interval `T`. The result at lag `τ` is modeled as
//!
//! ```text
//! ξ_k(τ) = β_k [ ξ_A(τ) + ξ_I(τ) + ξ_N(τ) ]
//! ```
//!
//! where the authentic and interference components are scaled translates of
//! the code autocorrelation triangle and `ξ_N` is complex Gaussian tap noise
//! correlated across nearby lags. Everything here is written in chip units
//! for lags and Watts for powers; the authentic code phase and carrier phase
//! serve as the reference (`τ_A = 0`, `Δθ_A = 0`), with the interference
//! offsets expressed relative to them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::observables;

/// Fine-grid resolution (chips) used by [`estimate_code_phase`].
pub const CODE_PHASE_RESOLUTION: f64 = 0.01;

/// Relative tolerance treating near-equal composite magnitudes as tied.
const PEAK_TIE_REL: f64 = 1e-12;

/// Interference description shared by all hypotheses: power ratio, code
/// offset, and carrier offset relative to the authentic signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceParams {
    /// Interference-to-authentic power ratio (linear, >= 0).
    pub eta: f64,
    /// Code-phase offset in chips (signed).
    pub delta_tau: f64,
    /// Carrier-phase offset in radians, normalized to [0, 2π).
    pub delta_theta: f64,
}

impl InterferenceParams {
    /// Builds a parameter vector, normalizing the carrier offset to [0, 2π).
    pub fn new(eta: f64, delta_tau: f64, delta_theta: f64) -> Result<Self> {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eta must be finite and >= 0, got {eta}"
            )));
        }
        if !delta_tau.is_finite() || !delta_theta.is_finite() {
            return Err(Error::InvalidParameter(
                "delta_tau and delta_theta must be finite".into(),
            ));
        }
        Ok(Self {
            eta,
            delta_tau,
            delta_theta: delta_theta.rem_euclid(2.0 * std::f64::consts::PI),
        })
    }

    /// The interference-free vector (code and carrier offsets are inert).
    pub fn clean() -> Self {
        Self {
            eta: 0.0,
            delta_tau: 0.0,
            delta_theta: 0.0,
        }
    }
}

/// Which mean-power model applies to the multi-access ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerCase {
    /// Only the target channel carries interference; all other received
    /// signals are clean with typical power `P_A`.
    CleanOrSingleTarget,
    /// Every received signal carries a non-coherent interferer of relative
    /// power `η` (jamming, or spoofing with per-channel random phase).
    NoncoherentEnsemble,
    /// Every received signal carries a coherent interferer with the same
    /// `(η, Δτ, Δθ)` (an ensemble spoofing attack).
    CoherentEnsemble,
}

/// Static description of one tracking channel and its RF environment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Authentic received power (dBW).
    pub p_a_dbw: f64,
    /// Thermal noise density (dBW/Hz).
    pub n0_dbw_hz: f64,
    /// Number of multi-access signals besides the target.
    pub m_s: u32,
    /// Chip interval (seconds).
    pub tau_c_s: f64,
    /// Accumulation interval `T` (seconds).
    pub accum_t_s: f64,
    /// Symmetric-difference tap offset (chips).
    pub tau_d: f64,
    /// Tracking tap offset (chips).
    pub tau_dll: f64,
    /// Power-measurement bandwidth (Hz).
    pub w_p_hz: f64,
    /// Power measurement deviation (dB).
    pub sigma_p_db: f64,
    /// Ordered lag offsets (chips), spanning at least [-1, +1].
    pub tap_grid: Vec<f64>,
    /// Mean-power case used when simulating spoofing observations.
    pub spoof_power_case: PowerCase,
}

impl ChannelConfig {
    /// Uniformly spaced taps over [-1, +1] chips, always including 0.
    pub fn uniform_taps(count: usize) -> Vec<f64> {
        assert!(
            count >= 3 && count % 2 == 1,
            "tap count must be odd and >= 3"
        );
        let half = (count / 2) as i64;
        (-half..=half).map(|i| i as f64 / half as f64).collect()
    }

    /// Symmetric taps at multiples of `spacing`, `2*half + 1` of them.
    pub fn spaced_taps(spacing: f64, half: i64) -> Vec<f64> {
        (-half..=half).map(|i| i as f64 * spacing).collect()
    }

    pub fn p_a_watts(&self) -> f64 {
        db_to_linear(self.p_a_dbw)
    }

    pub fn n0_watts_hz(&self) -> f64 {
        db_to_linear(self.n0_dbw_hz)
    }

    /// Checks invariants: positive intervals/bandwidths, tap offsets in
    /// (0, 1), and a strictly increasing tap grid containing 0 and ±τ_d.
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_d > 0.0 && self.tau_d < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_d must lie in (0, 1) chips, got {}",
                self.tau_d
            )));
        }
        if !(self.tau_dll > 0.0 && self.tau_dll < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_dll must lie in (0, 1) chips, got {}",
                self.tau_dll
            )));
        }
        if !(self.accum_t_s > 0.0) || !(self.w_p_hz > 0.0) || !(self.tau_c_s > 0.0) {
            return Err(Error::InvalidParameter(
                "accum_t_s, w_p_hz, tau_c_s must be positive".into(),
            ));
        }
        if self.sigma_p_db < 0.0 {
            return Err(Error::InvalidParameter("sigma_p_db must be >= 0".into()));
        }
        if self.tap_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "tap grid must be strictly increasing".into(),
            ));
        }
        let lo = *self.tap_grid.first().unwrap_or(&0.0);
        let hi = *self.tap_grid.last().unwrap_or(&0.0);
        if lo > -1.0 || hi < 1.0 {
            return Err(Error::InvalidParameter(
                "tap grid must span at least [-1, +1] chips".into(),
            ));
        }
        for required in [0.0, -self.tau_d, self.tau_d] {
            if !self.tap_grid.iter().any(|&t| (t - required).abs() < 1e-9) {
                return Err(Error::InvalidParameter(format!(
                    "tap grid must include lag {required} chips"
                )));
            }
        }
        Ok(())
    }
}

impl Default for ChannelConfig {
    /// GPS L1 C/A channel in a nominal environment: `P_A` = -156 dBW,
    /// `N_0` = -204 dBW/Hz, 7 multi-access signals, `T` = 100 ms,
    /// `τ_d` = 0.15 chips, `W_P` = 2 MHz, `σ_P` = 0.4 dB, 41 uniform taps.
    fn default() -> Self {
        Self {
            p_a_dbw: -156.0,
            n0_dbw_hz: -204.0,
            m_s: 7,
            tau_c_s: 977.5e-9,
            accum_t_s: 0.1,
            tau_d: 0.15,
            tau_dll: 0.15,
            w_p_hz: 2.0e6,
            sigma_p_db: 0.4,
            tap_grid: Self::uniform_taps(41),
            spoof_power_case: PowerCase::CoherentEnsemble,
        }
    }
}

/// One complex correlation-function snapshot over the configured tap grid.
///
/// `values` are already scaled by the AGC gain `beta_k`; `sigma_n` records
/// the unscaled per-component tap noise deviation, so the effective noise
/// deviation in `values` is `beta_k * sigma_n`.
#[derive(Debug, Clone)]
pub struct CorrelationSnapshot {
    pub lags: Vec<f64>,
    pub values: Vec<Complex64>,
    pub beta_k: f64,
    pub sigma_n: f64,
}

impl CorrelationSnapshot {
    /// Value at the given lag, matched within 1e-9 chips.
    pub fn value_at(&self, lag: f64) -> Option<Complex64> {
        self.lags
            .iter()
            .position(|&l| (l - lag).abs() < 1e-9)
            .map(|i| self.values[i])
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10.0_f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Ideal spreading-code autocorrelation: a unit triangle with one-chip
/// support, `R(τ) = max(0, 1 - |τ|)`.
pub fn autocorr(tau: f64) -> f64 {
    (1.0 - tau.abs()).max(0.0)
}

/// Per-component tap noise deviation, `σ_N = sqrt((N_0 + M_0) / 2T)`.
///
/// `n0_dbw_hz` is the thermal density in dBW/Hz; `m0_w_hz` is the
/// multi-access density already in linear W/Hz.
pub fn noise_sigma(n0_dbw_hz: f64, m0_w_hz: f64, accum_t_s: f64) -> Result<f64> {
    if !(accum_t_s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "accumulation interval must be positive, got {accum_t_s}"
        )));
    }
    if m0_w_hz < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "multi-access density must be >= 0, got {m0_w_hz}"
        )));
    }
    Ok(((db_to_linear(n0_dbw_hz) + m0_w_hz) / (2.0 * accum_t_s)).sqrt())
}

/// Thermal-noise approximation of the multi-access density,
/// `M_0 = (2/3) M_s P̄_M τ_c`, for sinc²-spectrum spreading codes.
pub fn multi_access_density(m_s: u32, p_bar_m_w: f64, tau_c_s: f64) -> f64 {
    (2.0 / 3.0) * m_s as f64 * p_bar_m_w * tau_c_s
}

/// Average per-signal received power `P̄_M` for the multi-access ensemble.
///
/// The coherent-ensemble expression `(1+η)P_A + 2√η P_A cos(Δθ) R(Δτ)` is
/// algebraically >= `(1-√η)² P_A` >= 0; negative round-off is clamped to 0
/// with a warning since power cannot be negative.
pub fn pbar_m_for_case(case: PowerCase, p_a_w: f64, theta: &InterferenceParams) -> f64 {
    match case {
        PowerCase::CleanOrSingleTarget => p_a_w,
        PowerCase::NoncoherentEnsemble => (1.0 + theta.eta) * p_a_w,
        PowerCase::CoherentEnsemble => {
            let coherent = 2.0
                * theta.eta.sqrt()
                * p_a_w
                * theta.delta_theta.cos()
                * autocorr(theta.delta_tau);
            let total = (1.0 + theta.eta) * p_a_w + coherent;
            if total < 0.0 {
                log::warn!("coherent-ensemble mean power {total} W clamped to 0");
                0.0
            } else {
                total
            }
        }
    }
}

/// AGC gain `β_k = sqrt(P_H0 / P_current)`, which scales the incoming signal
/// so its average power equals the interference-free level.
pub fn agc_gain(p_current_w: f64, p_h0_w: f64) -> Result<f64> {
    if !(p_current_w > 0.0) || !(p_h0_w > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "AGC powers must be positive, got current={p_current_w}, h0={p_h0_w}"
        )));
    }
    Ok((p_h0_w / p_current_w).sqrt())
}

/// Code-phase estimate `τ̂`: the argmax of the noiseless composite magnitude
/// `|ξ_A(τ) + ξ_I(τ)|` over a fine lag grid, as produced by early-minus-late
/// tracking in the narrow-spacing limit.
///
/// The grid spans [-2, Δτ + 2] chips at [`CODE_PHASE_RESOLUTION`]. Tracking
/// loops average noise heavily, so the argmax is taken on the noiseless
/// composite. Plateau ties (exactly equal magnitudes up to round-off) break
/// toward the smallest |τ̂ - τ_A|, i.e. toward tracking continuity.
pub fn estimate_code_phase(theta: &InterferenceParams, p_a_w: f64) -> f64 {
    debug_assert!(p_a_w > 0.0);
    if theta.eta == 0.0 {
        return 0.0;
    }
    let amp_i = theta.eta.sqrt();
    let cos_t = theta.delta_theta.cos();
    let lo = -2.0;
    let hi = (theta.delta_tau + 2.0).max(lo);
    let steps = ((hi - lo) / CODE_PHASE_RESOLUTION).ceil() as usize;

    // |ξ_A + ξ_I|² / P_A as a function of candidate lag; P_A scales out.
    let mag2 = |tau: f64| -> f64 {
        let a = autocorr(tau);
        let b = amp_i * autocorr(tau - theta.delta_tau);
        a * a + b * b + 2.0 * a * b * cos_t
    };

    let mut best = f64::NEG_INFINITY;
    for k in 0..=steps {
        let tau = lo + k as f64 * CODE_PHASE_RESOLUTION;
        let m = mag2(tau);
        if m > best {
            best = m;
        }
    }
    // Second pass: among near-ties, pick the lag closest to the authentic peak.
    let tol = PEAK_TIE_REL * best.max(f64::MIN_POSITIVE);
    let mut tau_hat = f64::INFINITY;
    for k in 0..=steps {
        let tau = lo + k as f64 * CODE_PHASE_RESOLUTION;
        if best - mag2(tau) <= tol && tau.abs() < tau_hat.abs() {
            tau_hat = tau;
        }
    }
    tau_hat
}

/// Per-component tap noise covariance: `σ_N² max(0, 1 - |lag_i - lag_j|)`.
///
/// Samples further than one chip apart are uncorrelated; the same matrix
/// applies independently to the real and imaginary parts.
pub fn noise_covariance(lags: &[f64], sigma_n: f64) -> DMatrix<f64> {
    let n = lags.len();
    let s2 = sigma_n * sigma_n;
    DMatrix::from_fn(n, n, |i, j| s2 * autocorr(lags[i] - lags[j]))
}

/// Cholesky factor of the unit-σ tap covariance, reused across draws.
#[derive(Debug, Clone)]
pub(crate) struct TapNoise {
    chol: DMatrix<f64>,
}

impl TapNoise {
    pub fn new(lags: &[f64]) -> Result<Self> {
        let base = noise_covariance(lags, 1.0);
        let chol = match nalgebra::Cholesky::new(base.clone()) {
            Some(c) => c.unpack(),
            None => {
                // Strictly increasing lags give a positive-definite triangle
                // kernel; a tiny ridge covers degenerate round-off.
                let n = base.nrows();
                let ridged = base + DMatrix::identity(n, n) * 1e-12;
                nalgebra::Cholesky::new(ridged)
                    .ok_or_else(|| {
                        Error::InvalidParameter("tap covariance is not positive definite".into())
                    })?
                    .unpack()
            }
        };
        Ok(Self { chol })
    }

    /// Draws one correlated complex noise vector with per-component
    /// deviation `sigma_n` into `out`.
    pub fn draw<R: Rng + ?Sized>(&self, sigma_n: f64, rng: &mut R, out: &mut [Complex64]) {
        let n = self.chol.nrows();
        debug_assert_eq!(out.len(), n);
        let mut z_re = vec![0.0f64; n];
        let mut z_im = vec![0.0f64; n];
        for k in 0..n {
            z_re[k] = StandardNormal.sample(rng);
            z_im[k] = StandardNormal.sample(rng);
        }
        for (i, slot) in out.iter_mut().enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for j in 0..=i {
                let l = self.chol[(i, j)];
                re += l * z_re[j];
                im += l * z_im[j];
            }
            *slot = Complex64::new(sigma_n * re, sigma_n * im);
        }
    }
}

/// Noiseless composite correlation values over `lags`, relative to the
/// tracked code phase `tau_hat`, before AGC scaling.
pub(crate) fn composite_values(
    theta: &InterferenceParams,
    p_a_w: f64,
    tau_hat: f64,
    lags: &[f64],
) -> Vec<Complex64> {
    let amp_a = p_a_w.sqrt();
    let amp_i = (theta.eta * p_a_w).sqrt();
    let phase = Complex64::from_polar(1.0, theta.delta_theta);
    let off_a = -tau_hat; // authentic peak in the tracked frame
    let off_i = theta.delta_tau - tau_hat;
    lags.iter()
        .map(|&lag| {
            let a = amp_a * autocorr(lag - off_a);
            let b = amp_i * autocorr(lag - off_i);
            Complex64::new(a, 0.0) + phase * b
        })
        .collect()
}

/// Noiseless variant of [`composite_snapshot`]: same code-phase estimate,
/// AGC gain, and noise bookkeeping, but no noise draw.
pub fn noiseless_snapshot(
    theta: &InterferenceParams,
    cfg: &ChannelConfig,
    case: PowerCase,
) -> Result<CorrelationSnapshot> {
    snapshot_impl(theta, cfg, case, None::<&mut rand_chacha::ChaCha8Rng>)
}

/// Simulates one correlation snapshot: estimates the tracked code phase,
/// evaluates the authentic and interference triangles at every tap, adds
/// correlated complex Gaussian tap noise, and applies the AGC gain implied
/// by the mean-power model for `case`.
pub fn composite_snapshot<R: Rng + ?Sized>(
    theta: &InterferenceParams,
    cfg: &ChannelConfig,
    case: PowerCase,
    rng: &mut R,
) -> Result<CorrelationSnapshot> {
    snapshot_impl(theta, cfg, case, Some(rng))
}

fn snapshot_impl<R: Rng + ?Sized>(
    theta: &InterferenceParams,
    cfg: &ChannelConfig,
    case: PowerCase,
    rng: Option<&mut R>,
) -> Result<CorrelationSnapshot> {
    cfg.validate()?;
    let noise = TapNoise::new(&cfg.tap_grid)?;
    let sim = SnapshotScale::for_case(theta, cfg, case)?;
    let mut values = sim.noiseless(theta, cfg);
    if let Some(rng) = rng {
        let mut noise_vec = vec![Complex64::new(0.0, 0.0); cfg.tap_grid.len()];
        noise.draw(sim.sigma_n, rng, &mut noise_vec);
        for (v, n) in values.iter_mut().zip(&noise_vec) {
            *v += n;
        }
    }
    for v in values.iter_mut() {
        *v *= sim.beta_k;
    }
    Ok(CorrelationSnapshot {
        lags: cfg.tap_grid.clone(),
        values,
        beta_k: sim.beta_k,
        sigma_n: sim.sigma_n,
    })
}

/// Per-θ deterministic quantities of a snapshot: tracked code phase, AGC
/// gain, and tap noise deviation under the selected mean-power case.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SnapshotScale {
    pub tau_hat: f64,
    pub beta_k: f64,
    pub sigma_n: f64,
}

impl SnapshotScale {
    pub fn for_case(
        theta: &InterferenceParams,
        cfg: &ChannelConfig,
        case: PowerCase,
    ) -> Result<Self> {
        let p_a = cfg.p_a_watts();
        let tau_hat = estimate_code_phase(theta, p_a);
        let ensemble = observables::power_ensemble(cfg, theta, case);
        let p_current = observables::mean_power_watts(cfg, &ensemble)?;
        let p_h0 = observables::h0_mean_power_watts(cfg);
        let beta_k = agc_gain(p_current, p_h0)?;
        let p_bar_m = pbar_m_for_case(case, p_a, theta);
        let m0 = multi_access_density(cfg.m_s, p_bar_m, cfg.tau_c_s);
        let sigma_n = noise_sigma(cfg.n0_dbw_hz, m0, cfg.accum_t_s)?;
        Ok(Self {
            tau_hat,
            beta_k,
            sigma_n,
        })
    }

    pub fn noiseless(&self, theta: &InterferenceParams, cfg: &ChannelConfig) -> Vec<Complex64> {
        composite_values(theta, cfg.p_a_watts(), self.tau_hat, &cfg.tap_grid)
    }
}
