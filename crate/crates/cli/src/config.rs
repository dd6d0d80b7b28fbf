//! Sweep configuration, read from TOML. Every field has a default, so an empty
//! file (or no file) describes the reference setup: 32x16 frame, 3.75 kHz
//! spacing at 4 GHz, `alpha = (0.1, 0.9)`, relay at half the source power and
//! the three-path general-case taps.

use std::path::Path;

use otfs_cdrt::channel::LinkId;
use otfs_cdrt::frame::FrameParams;
use otfs_cdrt::modem::{Constellation, PowerAllocation};
use otfs_cdrt::montecarlo::McConfig;
use otfs_cdrt::protocol::{LinkProfiles, RateTargets, Scenario, Scheme};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    /// Delay bins.
    pub m: usize,
    /// Doppler bins.
    pub n: usize,
    pub delta_f_hz: f64,
    pub carrier_hz: f64,
}

impl Default for FrameSection {
    fn default() -> Self {
        Self { m: 32, n: 16, delta_f_hz: 3750.0, carrier_hz: 4e9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub alpha_c: f64,
    pub alpha_e: f64,
    /// `P_r / P_s`.
    pub relay_ratio: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        Self { alpha_c: 0.1, alpha_e: 0.9, relay_ratio: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TapCase {
    /// Three paths, `k = [0, 1, 2]`, `l = [0, 2, 3]`.
    General,
    /// One path at `(1, 1)`.
    Special,
}

impl TapCase {
    pub fn taps(self) -> (Vec<usize>, Vec<usize>) {
        match self {
            TapCase::General => (vec![0, 1, 2], vec![0, 2, 3]),
            TapCase::Special => (vec![1], vec![1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaSection {
    pub sc_t1: f64,
    pub sr_t1: f64,
    pub sc_t2: f64,
    pub rc_t2: f64,
    pub re_t2: f64,
}

impl Default for OmegaSection {
    fn default() -> Self {
        Self { sc_t1: 1.0, sr_t1: 0.5, sc_t2: 1.0, rc_t2: 1.0, re_t2: 1.0 }
    }
}

impl OmegaSection {
    pub fn get(&self, id: LinkId) -> f64 {
        match id {
            LinkId::ScT1 => self.sc_t1,
            LinkId::SrT1 => self.sr_t1,
            LinkId::ScT2 => self.sc_t2,
            LinkId::RcT2 => self.rc_t2,
            LinkId::ReT2 => self.re_t2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub case: TapCase,
    /// Explicit Doppler taps; overrides `case` together with `l`.
    pub k: Option<Vec<usize>>,
    /// Explicit delay taps.
    pub l: Option<Vec<usize>>,
    pub omega: OmegaSection,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { case: TapCase::General, k: None, l: None, omega: OmegaSection::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesSection {
    pub r_xc: f64,
    pub r_xe: f64,
    pub r_xbarc: f64,
}

impl Default for RatesSection {
    fn default() -> Self {
        Self { r_xc: 1.8, r_xe: 1.0, r_xbarc: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
    /// Explicit grid; overrides start/stop/step.
    pub snr_db: Option<Vec<f64>>,
    pub schemes: Vec<Scheme>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            snr_db_start: 0.0,
            snr_db_stop: 40.0,
            snr_db_step: 2.0,
            snr_db: None,
            schemes: Scheme::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub trials: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self { trials: 100_000, seed: 2024, workers: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub xbarc_needs_sic: bool,
    pub constellation: Constellation,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub frame: FrameSection,
    pub power: PowerSection,
    pub channel: ChannelSection,
    pub rates: RatesSection,
    pub sweep: SweepSection,
    pub monte_carlo: MonteCarloSection,
    pub model: ModelSection,
}

impl Config {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse { path: origin.to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: origin.clone(), source })?;
        Self::from_toml(&text, &origin)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Turns the file view into checked simulation inputs.
    pub fn resolve(&self) -> Result<SweepConfig, ConfigError> {
        let f = &self.frame;
        let frame = FrameParams::new(f.m, f.n, f.delta_f_hz, f.carrier_hz).map_err(|e| invalid("frame", e))?;
        let p = &self.power;
        let alloc = PowerAllocation::new(p.alpha_c, p.alpha_e).map_err(|e| invalid("power.alpha_c", e))?;
        if !(p.relay_ratio.is_finite() && p.relay_ratio > 0.0) {
            return Err(invalid("power.relay_ratio", format!("must be positive, got {}", p.relay_ratio)));
        }
        let c = &self.channel;
        let (k, l) = match (&c.k, &c.l) {
            (Some(k), Some(l)) => (k.clone(), l.clone()),
            (None, None) => c.case.taps(),
            _ => return Err(invalid("channel.k", "`k` and `l` must be given together")),
        };
        if k.len() != l.len() {
            return Err(invalid("channel.l", format!("{} Doppler taps but {} delay taps", k.len(), l.len())));
        }
        let profiles =
            LinkProfiles::uniform(&k, &l, |id| c.omega.get(id)).map_err(|e| invalid("channel", e))?;
        let r = &self.rates;
        let rates = RateTargets::new(r.r_xc, r.r_xe, r.r_xbarc).map_err(|e| invalid("rates", e))?;

        let s = &self.sweep;
        let snr_grid_db = match &s.snr_db {
            Some(v) => v.clone(),
            None => {
                if !(s.snr_db_step > 0.0) || s.snr_db_stop < s.snr_db_start {
                    return Err(invalid("sweep.snr_db_step", "need step > 0 and stop >= start"));
                }
                let count = ((s.snr_db_stop - s.snr_db_start) / s.snr_db_step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| s.snr_db_start + i as f64 * s.snr_db_step).collect()
            }
        };
        if snr_grid_db.is_empty() || snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sweep.snr_db", "grid must be nonempty and finite"));
        }
        if s.schemes.is_empty() {
            return Err(invalid("sweep.schemes", "at least one scheme is required"));
        }
        let m = &self.monte_carlo;
        if m.trials == 0 {
            return Err(invalid("monte_carlo.trials", "must be at least 1"));
        }

        let template = Scenario {
            frame,
            profiles,
            alloc,
            rho_s: 1.0,
            rho_r: p.relay_ratio,
            rates,
            scheme: Scheme::Proposed,
            xbarc_needs_sic: self.model.xbarc_needs_sic,
            constellation: self.model.constellation,
        };
        template.check().map_err(|e| invalid("channel.omega", e))?;
        Ok(SweepConfig {
            template,
            relay_ratio: p.relay_ratio,
            snr_grid_db,
            schemes: s.schemes.clone(),
            mc: McConfig { trials: m.trials, master_seed: m.seed, parallelism: m.workers },
        })
    }
}

/// Checked sweep inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub template: Scenario,
    /// `P_r / P_s`.
    pub relay_ratio: f64,
    pub snr_grid_db: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub mc: McConfig,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SweepConfig {
    /// The template at source SNR `snr_db` for `scheme`.
    pub fn scenario(&self, snr_db: f64, scheme: Scheme) -> Scenario {
        let rho_s = db_to_linear(snr_db);
        Scenario { rho_s, rho_r: rho_s * self.relay_ratio, scheme, ..self.template.clone() }
    }
}
