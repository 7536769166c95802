//! Hypothesis parameter sets, prior probabilities, and samplers.
//!
//! Four hypotheses partition the interference parameter space:
//!
//! * `H0` — no interference (`η = 0`);
//! * `H1` — multipath (`0 < η < η_1`, `0 < Δτ < Δτ_1`);
//! * `H2` — spoofing (`η ≥ η_1`, `|Δτ| < Δτ_1`);
//! * `H3` — jamming (`η ≥ η_1`, `|Δτ| ≥ Δτ_1`),
//!
//! with default bounds `η_1 = 1` (linear) and `Δτ_1 = 2` chips. The
//! conditional densities are physics-informed: multipath power is log-normal
//! in dB and negatively correlated with an exponential excess delay whose
//! mean shrinks with satellite elevation; stealthy spoofing mimics
//! low-elevation multipath from just above the reliable-capture power bound;
//! jamming power is Rician with an inert code offset.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erfc;

use crate::correlator::InterferenceParams;
use crate::error::{Error, Result};

/// Retry budget for the truncation rejection loops in [`sample_theta`].
const MAX_REJECTION_TRIES: usize = 10_000;

/// Jamming code offsets are drawn uniformly up to this many chips; anything
/// past the correlation support is inert, so the upper end is arbitrary.
const JAM_DTAU_MAX_CHIPS: f64 = 10.0;

/// Pearson correlation between a standard normal score and the exponential
/// variate obtained from it by the inverse-CDF transform. Dividing the
/// target output correlation by this constant gives the Gaussian-copula
/// correlation that realizes it.
const COPULA_SCORE_CORR: f64 = 0.903_197_285_568_625_4;

/// The four signal-condition hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hypothesis {
    Clean,
    Multipath,
    Spoofing,
    Jamming,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 4] = [
        Hypothesis::Clean,
        Hypothesis::Multipath,
        Hypothesis::Spoofing,
        Hypothesis::Jamming,
    ];

    pub fn index(self) -> usize {
        match self {
            Hypothesis::Clean => 0,
            Hypothesis::Multipath => 1,
            Hypothesis::Spoofing => 2,
            Hypothesis::Jamming => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("hypothesis index {i} out of range")))
    }

    /// Short label used in CSV headers and reports.
    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::Clean => "H0",
            Hypothesis::Multipath => "H1",
            Hypothesis::Spoofing => "H2",
            Hypothesis::Jamming => "H3",
        }
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Prior probabilities and conditional-density parameters for all four
/// hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    /// Prior probabilities π_0..π_3; must sum to 1.
    pub pi: [f64; 4],
    /// Satellite elevation (degrees) selecting the multipath delay scale.
    pub alpha_e_deg: f64,
    /// Multipath power marginal: mean of η in dB.
    pub mp_eta_mean_db: f64,
    /// Multipath power marginal: standard deviation of η in dB.
    pub mp_eta_std_db: f64,
    /// Gaussian-copula correlation coupling η (dB) and Δτ under multipath.
    pub mp_corr: f64,
    /// Spoofing power marginal: mean of η in dB.
    pub sp_eta_mean_db: f64,
    /// Spoofing power marginal: standard deviation of η in dB.
    pub sp_eta_std_db: f64,
    /// Spoofing delay marginal: exponential parameter (ns).
    pub sp_mu_ns: f64,
    /// Jamming power marginal: Rician distance parameter (linear η).
    pub jam_nu: f64,
    /// Jamming power marginal: Rician scale parameter (linear η).
    pub jam_sigma: f64,
    /// Power boundary η_1 between weak and strong interference (linear).
    pub eta_bound: f64,
    /// Code-offset boundary Δτ_1 (chips).
    pub dtau_bound: f64,
    /// Chip interval (ns) converting delay marginals to chips.
    pub tau_c_ns: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            pi: [0.6, 0.2, 0.05, 0.15],
            alpha_e_deg: 30.0,
            mp_eta_mean_db: -21.0,
            mp_eta_std_db: 5.0,
            // Tuned so the realized linear correlation between η (dB) and
            // Δτ comes out at -0.23.
            mp_corr: -0.23 / COPULA_SCORE_CORR,
            sp_eta_mean_db: 1.0,
            sp_eta_std_db: 0.5,
            sp_mu_ns: 120.0,
            jam_nu: 6.0,
            jam_sigma: 2.0,
            eta_bound: 1.0,
            dtau_bound: 2.0,
            tau_c_ns: 977.5,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.pi.iter().sum();
        if self.pi.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "priors must be nonnegative and sum to 1, got {:?}",
                self.pi
            )));
        }
        if !(self.eta_bound > 0.0) || !(self.dtau_bound > 0.0) {
            return Err(Error::InvalidParameter(
                "eta_bound and dtau_bound must be positive".into(),
            ));
        }
        if !(self.tau_c_ns > 0.0) || !(self.sp_mu_ns > 0.0) {
            return Err(Error::InvalidParameter(
                "tau_c_ns and sp_mu_ns must be positive".into(),
            ));
        }
        if !(self.mp_eta_std_db > 0.0) || !(self.sp_eta_std_db > 0.0) || !(self.jam_sigma > 0.0) {
            return Err(Error::InvalidParameter(
                "distribution scale parameters must be positive".into(),
            ));
        }
        if !(-1.0..=1.0).contains(&self.mp_corr) {
            return Err(Error::InvalidParameter(format!(
                "mp_corr must lie in [-1, 1], got {}",
                self.mp_corr
            )));
        }
        Ok(())
    }

    /// Deterministic per-hypothesis draw counts, `N_i = round(π_i N_P)`.
    pub fn draw_counts(&self, n_p_total: usize) -> [usize; 4] {
        let mut out = [0usize; 4];
        for (i, &p) in self.pi.iter().enumerate() {
            out[i] = (p * n_p_total as f64).round() as usize;
        }
        out
    }
}

/// Mean multipath excess delay (ns) as a function of satellite elevation:
/// `μ(α_e) = 0.012 α_e² - 2.4 α_e + 134`.
///
/// The fit is valid for 20° ≤ α_e ≤ 80°; values outside are clamped with a
/// warning.
pub fn mu_of_elevation(alpha_e_deg: f64) -> f64 {
    let a = if !(20.0..=80.0).contains(&alpha_e_deg) {
        log::warn!("elevation {alpha_e_deg}° outside fitted range [20, 80], clamping");
        alpha_e_deg.clamp(20.0, 80.0)
    } else {
        alpha_e_deg
    };
    0.012 * a * a - 2.4 * a + 134.0
}

fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.0..2.0 * std::f64::consts::PI)
}

/// Draws one interference parameter vector from the conditional density of
/// the given hypothesis.
///
/// Truncation to the hypothesis parameter set is by rejection; the loops are
/// bounded and fail loudly if the configuration makes acceptance too rare.
pub fn sample_theta<R: Rng + ?Sized>(
    hypothesis: Hypothesis,
    cfg: &PriorConfig,
    rng: &mut R,
) -> Result<InterferenceParams> {
    match hypothesis {
        Hypothesis::Clean => {
            // η = 0 exactly; the offsets are inert and drawn uniformly.
            let dtau = rng.random_range(0.0..cfg.dtau_bound);
            InterferenceParams::new(0.0, dtau, uniform_phase(rng))
        }
        Hypothesis::Multipath => {
            let mu_chips = mu_of_elevation(cfg.alpha_e_deg) / cfg.tau_c_ns;
            for _ in 0..MAX_REJECTION_TRIES {
                // Gaussian copula: correlated standard scores drive the
                // normal dB-power marginal and the exponential delay
                // marginal through its inverse CDF.
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = cfg.mp_corr * z1
                    + (1.0 - cfg.mp_corr * cfg.mp_corr).sqrt()
                        * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
                let eta_db = cfg.mp_eta_mean_db + cfg.mp_eta_std_db * z1;
                let eta = 10f64.powf(eta_db / 10.0);
                let dtau = -mu_chips * normal_sf(z2).ln();
                if eta > 0.0 && eta < cfg.eta_bound && dtau > 0.0 && dtau < cfg.dtau_bound {
                    return InterferenceParams::new(eta, dtau, uniform_phase(rng));
                }
            }
            Err(Error::RejectionExhausted {
                hypothesis: 1,
                tries: MAX_REJECTION_TRIES,
            })
        }
        Hypothesis::Spoofing => {
            let mut eta = None;
            for _ in 0..MAX_REJECTION_TRIES {
                let z: f64 = StandardNormal.sample(rng);
                let db = cfg.sp_eta_mean_db + cfg.sp_eta_std_db * z;
                let lin = 10f64.powf(db / 10.0);
                if lin >= cfg.eta_bound {
                    eta = Some(lin);
                    break;
                }
            }
            let eta = eta.ok_or(Error::RejectionExhausted {
                hypothesis: 2,
                tries: MAX_REJECTION_TRIES,
            })?;
            let mu_chips = cfg.sp_mu_ns / cfg.tau_c_ns;
            let mut dtau = None;
            for _ in 0..MAX_REJECTION_TRIES {
                let mag = -mu_chips * rng.random::<f64>().max(f64::MIN_POSITIVE).ln();
                if mag > 0.0 && mag < cfg.dtau_bound {
                    dtau = Some(if rng.random::<bool>() { mag } else { -mag });
                    break;
                }
            }
            let dtau = dtau.ok_or(Error::RejectionExhausted {
                hypothesis: 2,
                tries: MAX_REJECTION_TRIES,
            })?;
            InterferenceParams::new(eta, dtau, uniform_phase(rng))
        }
        Hypothesis::Jamming => {
            let mut eta = None;
            for _ in 0..MAX_REJECTION_TRIES {
                let x: f64 = cfg.jam_nu
                    + cfg.jam_sigma
                        * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
                let y: f64 = cfg.jam_sigma
                    * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
                let r = x.hypot(y);
                if r >= cfg.eta_bound {
                    eta = Some(r);
                    break;
                }
            }
            let eta = eta.ok_or(Error::RejectionExhausted {
                hypothesis: 3,
                tries: MAX_REJECTION_TRIES,
            })?;
            let dtau = rng.random_range(cfg.dtau_bound..JAM_DTAU_MAX_CHIPS);
            InterferenceParams::new(eta, dtau, uniform_phase(rng))
        }
    }
}

/// Maps a parameter vector to its hypothesis set.
///
/// Total over every vector the samplers can produce. Weak interference with
/// an out-of-band code offset falls in no set; such an echo causes no
/// correlation distortion and is classified as multipath with a warning.
pub fn membership(theta: &InterferenceParams, cfg: &PriorConfig) -> Hypothesis {
    if theta.eta == 0.0 {
        return Hypothesis::Clean;
    }
    if theta.eta >= cfg.eta_bound {
        if theta.delta_tau.abs() < cfg.dtau_bound {
            return Hypothesis::Spoofing;
        }
        return Hypothesis::Jamming;
    }
    if theta.delta_tau > 0.0 && theta.delta_tau < cfg.dtau_bound {
        return Hypothesis::Multipath;
    }
    log::warn!(
        "theta (eta={}, dtau={}) lies outside all parameter sets; treating as multipath",
        theta.eta,
        theta.delta_tau
    );
    Hypothesis::Multipath
}
