//! Deterministic parallel Monte Carlo over channel realizations.
//!
//! Trial `i` draws from its own ChaCha8 stream `i` under the master seed, so
//! results do not depend on how trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::channel::{draw_realization, ChannelProfile, SpectrumPlan};
use crate::error::{Error, Result};
use crate::frame::FrameParams;
use crate::protocol::{Scenario, TrialEngine, TrialOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// Worker count; `None` uses the global pool.
    pub parallelism: Option<usize>,
}

impl McConfig {
    pub fn new(trials: u64, master_seed: u64) -> Self {
        Self { trials, master_seed, parallelism: None }
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidScenario("at least one trial is required".into()));
        }
        Ok(())
    }
}

/// Random stream of trial `index`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn run_parallel<T: Send>(parallelism: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match parallelism {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool ({e}); using the global pool");
                f()
            }
        },
        None => f(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub outages: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci95_halfwidth: f64,
}

impl OutageEstimate {
    pub fn from_counts(outages: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p_hat = outages as f64 / n;
        let ci95_halfwidth = 1.96 * (p_hat * (1.0 - p_hat) / n).sqrt();
        Self { outages, trials, p_hat, ci95_halfwidth }
    }

    /// Fewer than ten outage events: the normal interval is unreliable.
    pub fn low_confidence(&self) -> bool {
        self.outages < 10
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimates {
    pub xc: OutageEstimate,
    pub xe: OutageEstimate,
    pub xbarc: OutageEstimate,
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts([u64; 3]);

impl Counts {
    fn add(mut self, o: TrialOutcome) -> Self {
        self.0[0] += o.outage_xc as u64;
        self.0[1] += o.outage_xe as u64;
        self.0[2] += o.outage_xbarc as u64;
        self
    }

    fn merge(self, other: Self) -> Self {
        Counts([self.0[0] + other.0[0], self.0[1] + other.0[1], self.0[2] + other.0[2]])
    }
}

pub fn estimate_outage(s: &Scenario, mc: &McConfig) -> Result<OutageEstimates> {
    mc.check()?;
    let engine = TrialEngine::new(s)?;
    let seed = mc.master_seed;
    let counts = run_parallel(mc.parallelism, || {
        (0..mc.trials)
            .into_par_iter()
            .fold(Counts::default, |acc, i| acc.add(engine.run_trial(&mut trial_rng(seed, i))))
            .reduce(Counts::default, Counts::merge)
    });
    let est = |c| OutageEstimate::from_counts(c, mc.trials);
    Ok(OutageEstimates { xc: est(counts.0[0]), xe: est(counts.0[1]), xbarc: est(counts.0[2]) })
}

/// How `Theta` is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaSampling {
    /// From eigenvalues of drawn channel realizations.
    Exact,
    /// Independent groups: `sum_g C_g / E_g`, `E_g ~ Exp(mean Omega)`.
    Model,
}

/// Sorted samples of `Theta` for one link profile.
pub fn sample_theta(
    profile: &ChannelProfile,
    frame: &FrameParams,
    mc: &McConfig,
    mode: ThetaSampling,
) -> Result<Vec<f64>> {
    mc.check()?;
    let plan = SpectrumPlan::new(profile, frame)?;
    let exp = Exp::new(1.0 / profile.omega_total)
        .map_err(|e| Error::InvalidProfile(format!("bad exponential rate: {e}")))?;
    let seed = mc.master_seed;
    let mut samples: Vec<f64> = run_parallel(mc.parallelism, || {
        (0..mc.trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, i);
                match mode {
                    ThetaSampling::Exact => plan.theta(&draw_realization(profile, &mut rng).gains),
                    ThetaSampling::Model => plan
                        .groups()
                        .multiplicities
                        .iter()
                        .map(|&c| c as f64 / exp.sample(&mut rng))
                        .sum(),
                }
            })
            .collect()
    });
    samples.sort_by(f64::total_cmp);
    Ok(samples)
}

/// Fraction of `sorted` strictly below `z`.
pub fn empirical_cdf(sorted: &[f64], z: f64) -> f64 {
    sorted.partition_point(|&v| v < z) as f64 / sorted.len() as f64
}

/// Two-sample Kolmogorov-Smirnov statistic of two sorted samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at the 1% level.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// Largest `|F_emp(z) - cdf(z)|` over the sample points.
pub fn sup_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}
