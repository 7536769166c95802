//! Key-value run configuration.
//!
//! The format is plain `key = value` lines under bracketed section headers,
//! with `#` comments:
//!
//! ```text
//! [priors]
//! pi = 0.6,0.2,0.05,0.15
//! jam_nu = 6.0
//!
//! [run]
//! seed = 1
//! cost = theta
//! ```
//!
//! Unknown sections or keys are errors so typos surface immediately.

use std::collections::BTreeMap;

use crate::correlator::{ChannelConfig, PowerCase};
use crate::cost::{CostMatrix, CostModel};
use crate::error::{Error, Result};
use crate::priors::PriorConfig;
use crate::regions::GridSpec;

/// Parsed sections -> keys -> raw values.
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl KvConfig {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut out = Self::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| Error::Parse {
                    path: path.into(),
                    line: lineno,
                    msg: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                out.sections.entry(section.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.into(),
                line: lineno,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            out.sections
                .entry(section.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(out)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(|s| s.as_str())
    }

    pub fn set(&mut self, section: &str, key: &str, value: String) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value);
    }
}

/// How the spoofing observation model treats the multi-access ensemble.
fn parse_power_case(s: &str) -> Result<PowerCase> {
    match s {
        "coherent" => Ok(PowerCase::CoherentEnsemble),
        "noncoherent" => Ok(PowerCase::NoncoherentEnsemble),
        other => Err(Error::Config(format!(
            "spoof_power_case must be `coherent` or `noncoherent`, got {other:?}"
        ))),
    }
}

/// Which cost function the run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    Uniform,
    Theta,
}

/// Everything one command invocation needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub channel: ChannelConfig,
    pub priors: PriorConfig,
    pub grid: GridSpec,
    pub cost: CostKind,
    /// Replaces the built-in uniform matrix when present.
    pub cost_matrix: Option<CostMatrix>,
    pub seed: Option<u64>,
    pub n_p: usize,
    pub n_m: usize,
    pub vote_m: usize,
    pub vote_k: usize,
    pub channels_n_min: usize,
    pub gate_power_db: f64,
    pub quiet_t0: f64,
    pub quiet_t1: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            channel: ChannelConfig::default(),
            priors: PriorConfig::default(),
            grid: GridSpec::default(),
            cost: CostKind::Theta,
            cost_matrix: None,
            seed: None,
            n_p: 100_000,
            n_m: 20,
            vote_m: 6,
            vote_k: 20,
            channels_n_min: 6,
            gate_power_db: crate::detector::DEFAULT_GATE_POWER_DB,
            quiet_t0: 0.0,
            quiet_t1: 15.0,
        }
    }
}

impl RunConfig {
    /// The cost model this run drives region construction with.
    pub fn cost_model(&self) -> CostModel {
        match (self.cost, self.cost_matrix) {
            (CostKind::Theta, _) => CostModel::ThetaDependent {
                tau_dll: self.channel.tau_dll,
            },
            (CostKind::Uniform, Some(m)) => CostModel::Matrix(m),
            (CostKind::Uniform, None) => CostModel::Uniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.priors.validate()?;
        self.grid.validate()?;
        if self.n_p == 0 || self.n_m == 0 {
            return Err(Error::Config("n_p and n_m must be positive".into()));
        }
        if self.vote_m == 0 || self.vote_m > self.vote_k {
            return Err(Error::Config(format!(
                "need 0 < vote_m <= vote_k, got {}/{}",
                self.vote_m, self.vote_k
            )));
        }
        if self.quiet_t1 <= self.quiet_t0 {
            return Err(Error::Config("quiet window must be nonempty".into()));
        }
        Ok(())
    }

    /// Applies a parsed config file on top of the defaults.
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply(kv)?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let kv = KvConfig::parse(&text, &path.display().to_string())?;
        Self::from_kv(&kv)
    }

    pub fn apply(&mut self, kv: &KvConfig) -> Result<()> {
        for (section, entries) in &kv.sections {
            for (key, value) in entries {
                self.apply_one(section, key, value)?;
            }
        }
        Ok(())
    }

    fn apply_one(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let bad =
            |what: &str| Error::Config(format!("[{section}] {key}: invalid {what} {value:?}"));
        let f = || value.parse::<f64>().map_err(|_| bad("number"));
        let u = || value.parse::<usize>().map_err(|_| bad("count"));
        match (section, key) {
            ("channel", "p_a_dbw") => self.channel.p_a_dbw = f()?,
            ("channel", "n0_dbw_hz") => self.channel.n0_dbw_hz = f()?,
            ("channel", "m_s") => self.channel.m_s = u()? as u32,
            ("channel", "tau_c_s") => self.channel.tau_c_s = f()?,
            ("channel", "accum_t_s") => self.channel.accum_t_s = f()?,
            ("channel", "tau_d") => self.channel.tau_d = f()?,
            ("channel", "tau_dll") => self.channel.tau_dll = f()?,
            ("channel", "w_p_hz") => self.channel.w_p_hz = f()?,
            ("channel", "sigma_p_db") => self.channel.sigma_p_db = f()?,
            ("channel", "tap_count") => {
                let n = u()?;
                if n < 3 || n % 2 == 0 {
                    return Err(bad("tap count (odd, >= 3)"));
                }
                self.channel.tap_grid = ChannelConfig::uniform_taps(n);
            }
            ("channel", "spoof_power_case") => {
                self.channel.spoof_power_case = parse_power_case(value)?
            }
            ("priors", "pi") => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("prior list"))?;
                if parts.len() != 4 {
                    return Err(bad("prior list of four"));
                }
                self.priors.pi = [parts[0], parts[1], parts[2], parts[3]];
            }
            ("priors", "alpha_e_deg") => self.priors.alpha_e_deg = f()?,
            ("priors", "mp_eta_mean_db") => self.priors.mp_eta_mean_db = f()?,
            ("priors", "mp_eta_std_db") => self.priors.mp_eta_std_db = f()?,
            ("priors", "mp_corr") => self.priors.mp_corr = f()?,
            ("priors", "sp_eta_mean_db") => self.priors.sp_eta_mean_db = f()?,
            ("priors", "sp_eta_std_db") => self.priors.sp_eta_std_db = f()?,
            ("priors", "sp_mu_ns") => self.priors.sp_mu_ns = f()?,
            ("priors", "jam_nu") => self.priors.jam_nu = f()?,
            ("priors", "jam_sigma") => self.priors.jam_sigma = f()?,
            ("priors", "eta_bound") => self.priors.eta_bound = f()?,
            ("priors", "dtau_bound") => self.priors.dtau_bound = f()?,
            ("priors", "tau_c_ns") => self.priors.tau_c_ns = f()?,
            ("grid", "d_min") => self.grid.d_min = f()?,
            ("grid", "d_max") => self.grid.d_max = f()?,
            ("grid", "n_d") => self.grid.n_d = u()?,
            ("grid", "p_min") => self.grid.p_min = f()?,
            ("grid", "p_max") => self.grid.p_max = f()?,
            ("grid", "n_p") => self.grid.n_p = u()?,
            ("run", "seed") => {
                self.seed = Some(value.parse().map_err(|_| bad("seed"))?);
            }
            ("run", "n_p") => self.n_p = u()?,
            ("run", "n_m") => self.n_m = u()?,
            ("run", "cost") => {
                self.cost = match value {
                    "uniform" => CostKind::Uniform,
                    "theta" => CostKind::Theta,
                    _ => return Err(bad("cost mode (uniform|theta)")),
                }
            }
            ("cost", row) if row.starts_with("row") => {
                let i: usize = row[3..].parse().map_err(|_| bad("cost row"))?;
                if i > 3 {
                    return Err(bad("cost row index"));
                }
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("cost row"))?;
                if parts.len() != 4 {
                    return Err(bad("cost row of four"));
                }
                let mut m = self
                    .cost_matrix
                    .map(|m| *m.entries())
                    .unwrap_or(*crate::cost::uniform_cost().entries());
                m[i] = [parts[0], parts[1], parts[2], parts[3]];
                self.cost_matrix = Some(CostMatrix::new(m)?);
            }
            ("detector", "vote_m") => self.vote_m = u()?,
            ("detector", "vote_k") => self.vote_k = u()?,
            ("detector", "channels_n_min") => self.channels_n_min = u()?,
            ("detector", "gate_power_db") => self.gate_power_db = f()?,
            ("detector", "quiet_t0") => self.quiet_t0 = f()?,
            ("detector", "quiet_t1") => self.quiet_t1 = f()?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown config key [{section}] {key}"
                )))
            }
        }
        Ok(())
    }

    /// Serializes the full configuration in the key-value format.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        use std::fmt::Write;
        let _ = writeln!(s, "[channel]");
        let _ = writeln!(s, "p_a_dbw = {}", self.channel.p_a_dbw);
        let _ = writeln!(s, "n0_dbw_hz = {}", self.channel.n0_dbw_hz);
        let _ = writeln!(s, "m_s = {}", self.channel.m_s);
        let _ = writeln!(s, "tau_c_s = {}", self.channel.tau_c_s);
        let _ = writeln!(s, "accum_t_s = {}", self.channel.accum_t_s);
        let _ = writeln!(s, "tau_d = {}", self.channel.tau_d);
        let _ = writeln!(s, "tau_dll = {}", self.channel.tau_dll);
        let _ = writeln!(s, "w_p_hz = {}", self.channel.w_p_hz);
        let _ = writeln!(s, "sigma_p_db = {}", self.channel.sigma_p_db);
        let _ = writeln!(s, "tap_count = {}", self.channel.tap_grid.len());
        let _ = writeln!(
            s,
            "spoof_power_case = {}",
            match self.channel.spoof_power_case {
                PowerCase::NoncoherentEnsemble => "noncoherent",
                _ => "coherent",
            }
        );
        let _ = writeln!(s, "\n[priors]");
        let pi = self.priors.pi;
        let _ = writeln!(s, "pi = {},{},{},{}", pi[0], pi[1], pi[2], pi[3]);
        let _ = writeln!(s, "alpha_e_deg = {}", self.priors.alpha_e_deg);
        let _ = writeln!(s, "mp_eta_mean_db = {}", self.priors.mp_eta_mean_db);
        let _ = writeln!(s, "mp_eta_std_db = {}", self.priors.mp_eta_std_db);
        let _ = writeln!(s, "mp_corr = {}", self.priors.mp_corr);
        let _ = writeln!(s, "sp_eta_mean_db = {}", self.priors.sp_eta_mean_db);
        let _ = writeln!(s, "sp_eta_std_db = {}", self.priors.sp_eta_std_db);
        let _ = writeln!(s, "sp_mu_ns = {}", self.priors.sp_mu_ns);
        let _ = writeln!(s, "jam_nu = {}", self.priors.jam_nu);
        let _ = writeln!(s, "jam_sigma = {}", self.priors.jam_sigma);
        let _ = writeln!(s, "eta_bound = {}", self.priors.eta_bound);
        let _ = writeln!(s, "dtau_bound = {}", self.priors.dtau_bound);
        let _ = writeln!(s, "tau_c_ns = {}", self.priors.tau_c_ns);
        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "d_min = {}", self.grid.d_min);
        let _ = writeln!(s, "d_max = {}", self.grid.d_max);
        let _ = writeln!(s, "n_d = {}", self.grid.n_d);
        let _ = writeln!(s, "p_min = {}", self.grid.p_min);
        let _ = writeln!(s, "p_max = {}", self.grid.p_max);
        let _ = writeln!(s, "n_p = {}", self.grid.n_p);
        let _ = writeln!(s, "\n[run]");
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        let _ = writeln!(s, "n_p = {}", self.n_p);
        let _ = writeln!(s, "n_m = {}", self.n_m);
        let _ = writeln!(
            s,
            "cost = {}",
            match self.cost {
                CostKind::Uniform => "uniform",
                CostKind::Theta => "theta",
            }
        );
        if let Some(m) = &self.cost_matrix {
            let _ = writeln!(s, "\n[cost]");
            for (i, row) in m.entries().iter().enumerate() {
                let _ = writeln!(s, "row{} = {},{},{},{}", i, row[0], row[1], row[2], row[3]);
            }
        }
        let _ = writeln!(s, "\n[detector]");
        let _ = writeln!(s, "vote_m = {}", self.vote_m);
        let _ = writeln!(s, "vote_k = {}", self.vote_k);
        let _ = writeln!(s, "channels_n_min = {}", self.channels_n_min);
        let _ = writeln!(s, "gate_power_db = {}", self.gate_power_db);
        let _ = writeln!(s, "quiet_t0 = {}", self.quiet_t0);
        let _ = writeln!(s, "quiet_t1 = {}", self.quiet_t1);
        s
    }
}
