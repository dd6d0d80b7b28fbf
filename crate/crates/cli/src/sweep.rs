//! SNR sweeps: analytic and Monte Carlo outage per signal, and sum rate.

use std::path::Path;

use otfs_cdrt::analysis::{analytic_outage, scheme_sum_rate, LinkLaws, OutageInputs, OutageTriple};
use otfs_cdrt::montecarlo::{estimate_outage, OutageEstimate};
use otfs_cdrt::protocol::Scheme;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::config::SweepConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Xc,
    Xe,
    Xbarc,
}

impl Signal {
    pub const ALL: [Signal; 3] = [Signal::Xc, Signal::Xe, Signal::Xbarc];

    pub fn name(&self) -> &'static str {
        match self {
            Signal::Xc => "xc",
            Signal::Xe => "xe",
            Signal::Xbarc => "xbarc",
        }
    }

    /// Signals a scheme actually delivers; nCDRT has no `x̄_c`.
    pub fn carried_by(scheme: Scheme) -> &'static [Signal] {
        match scheme {
            Scheme::Ncdrt => &[Signal::Xc, Signal::Xe],
            _ => &Signal::ALL,
        }
    }
}

/// Analytic and simulated outage of one scheme at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub analytic: OutageTriple,
    pub sum_rate_analytic: f64,
    pub mc: Option<McPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPoint {
    pub xc: OutageEstimate,
    pub xe: OutageEstimate,
    pub xbarc: OutageEstimate,
    pub sum_rate: f64,
}

fn pick<T: Copy>(signal: Signal, xc: T, xe: T, xbarc: T) -> T {
    match signal {
        Signal::Xc => xc,
        Signal::Xe => xe,
        Signal::Xbarc => xbarc,
    }
}

impl SweepPoint {
    pub fn analytic_of(&self, signal: Signal) -> f64 {
        pick(signal, self.analytic.xc, self.analytic.xe, self.analytic.xbarc)
    }

    pub fn mc_of(&self, signal: Signal) -> Option<OutageEstimate> {
        self.mc.map(|m| pick(signal, m.xc, m.xe, m.xbarc))
    }
}

/// Runs every (SNR, scheme) pair of `cfg`. With `with_mc` false only the
/// analytic side is computed.
pub fn run_sweep(cfg: &SweepConfig, with_mc: bool) -> anyhow::Result<Vec<SweepPoint>> {
    // eigenvalue groups depend on taps and frame only, not on SNR
    let laws = LinkLaws::from_scenario(&cfg.template)?;
    let mut points = Vec::with_capacity(cfg.snr_grid_db.len() * cfg.schemes.len());
    for &snr_db in &cfg.snr_grid_db {
        for &scheme in &cfg.schemes {
            let s = cfg.scenario(snr_db, scheme);
            let analytic = analytic_outage(scheme, &OutageInputs::from_scenario(&s), &laws)?;
            let sum_rate_analytic = scheme_sum_rate(scheme, &analytic, &s.rates);
            let mc = if with_mc {
                let est = estimate_outage(&s, &cfg.mc)?;
                let p = OutageTriple { xc: est.xc.p_hat, xe: est.xe.p_hat, xbarc: est.xbarc.p_hat };
                Some(McPoint { xc: est.xc, xe: est.xe, xbarc: est.xbarc, sum_rate: scheme_sum_rate(scheme, &p, &s.rates) })
            } else {
                None
            };
            log::info!("{snr_db:>5.1} dB {:<8} sum rate {sum_rate_analytic:.4}", scheme.name());
            points.push(SweepPoint { snr_db, scheme, analytic, sum_rate_analytic, mc });
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageRow {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub signal: Signal,
    pub p_analytic: f64,
    pub p_mc: Option<f64>,
    pub ci95: Option<f64>,
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumRateRow {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub sr_analytic: f64,
    pub sr_mc: Option<f64>,
}

pub fn outage_rows(points: &[SweepPoint]) -> Vec<OutageRow> {
    points
        .iter()
        .flat_map(|p| {
            Signal::carried_by(p.scheme).iter().map(move |&signal| {
                let mc = p.mc_of(signal);
                OutageRow {
                    snr_db: p.snr_db,
                    scheme: p.scheme,
                    signal,
                    p_analytic: p.analytic_of(signal),
                    p_mc: mc.map(|e| e.p_hat),
                    ci95: mc.map(|e| e.ci95_halfwidth),
                    trials: mc.map(|e| e.trials),
                }
            })
        })
        .collect()
}

pub fn sum_rate_rows(points: &[SweepPoint]) -> Vec<SumRateRow> {
    points
        .iter()
        .map(|p| SumRateRow {
            snr_db: p.snr_db,
            scheme: p.scheme,
            sr_analytic: p.sum_rate_analytic,
            sr_mc: p.mc.map(|m| m.sum_rate),
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok(rows)
}
