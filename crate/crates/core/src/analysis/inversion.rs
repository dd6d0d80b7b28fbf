//! Gil-Pelaez inversion of the CF of `Theta` by a half-offset midpoint sum:
//!
//! ```text
//! Phi(z) = 1/2 - (1/pi) sum_{i=0}^{I} Im(exp(-j (i+1/2) mu z) cf((i+1/2) mu)) / (i+1/2)
//! ```
//!
//! The sum is exact up to two errors: truncation (controlled by how small the
//! CF is at `(I+1/2) mu`) and aliasing. Summing the sine series in closed form
//! shows the untruncated sum equals
//!
//! ```text
//! F(z) + sum_{k odd} P(z + k L < Theta < z + (k+1) L),   L = 2 pi / mu
//! ```
//!
//! `Theta` has a `1/x` tail, `P(Theta > x) ~ a / x` with `a = NM / Omega`, so
//! the aliased mass is about `ln 2 * a / L`. [`theta_cdf`] subtracts that
//! leading term; [`gil_pelaez_cdf`] is the plain sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::cf::{cf_theta, CfSpec};
use crate::error::{Error, Result};

/// CF modulus at which the sum is truncated.
pub const CF_CUTOFF: f64 = 1e-8;
/// Minimum number of terms.
pub const MIN_TERMS: usize = 2000;
/// Aliasing period as a multiple of the evaluation point.
pub const PERIOD_PER_Z: f64 = 50.0;
/// Aliasing period as a multiple of the tail scale `NM / Omega`.
pub const PERIOD_PER_TAIL: f64 = 400.0;
/// Hard cap on the number of terms. When it binds the aliasing period shrinks
/// below the requested multiples and a warning is logged.
pub const MAX_TERMS: usize = 1 << 22;

const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionParams {
    /// Step `mu > 0`.
    pub mu: f64,
    /// Highest term index `I >= 1`.
    pub terms: usize,
}

impl InversionParams {
    pub fn new(mu: f64, terms: usize) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) || terms < 1 {
            return Err(Error::InvalidInversion { mu, terms });
        }
        Ok(Self { mu, terms })
    }
}

/// The unclamped sum.
pub fn gil_pelaez_raw(z: f64, p: &InversionParams, cf: &CfSpec) -> f64 {
    let n = p.terms + 1;
    let chunks: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let u = i as f64 + 0.5;
                let t = u * p.mu;
                let v = cf_theta(t, cf);
                let (s, co) = (t * z).sin_cos();
                // Im(exp(-j t z) v)
                acc += (co * v.im - s * v.re) / u;
            }
            acc
        })
        .collect();
    // fixed-order reduction keeps the result independent of scheduling
    0.5 - chunks.iter().sum::<f64>() / PI
}

/// `P(Theta < z)`, clamped to `[0, 1]`.
pub fn gil_pelaez_cdf(z: f64, p: &InversionParams, cf: &CfSpec) -> f64 {
    clamp_logged(z, gil_pelaez_raw(z, p, cf))
}

/// Smallest power of two `t` in `[2^-40, 2^40]` with `|cf(t)| < CF_CUTOFF`.
pub fn decay_point(cf: &CfSpec) -> Result<f64> {
    let mut t = (-40f64).exp2();
    while t <= 40f64.exp2() {
        if cf_theta(t, cf).norm() < CF_CUTOFF {
            return Ok(t);
        }
        t *= 2.0;
    }
    Err(Error::NonDecayingCf { threshold: CF_CUTOFF })
}

/// Picks `mu` and `I` for evaluating the CDF at `z`.
pub fn auto_tune_inversion(cf: &CfSpec, z: f64) -> Result<InversionParams> {
    let mut t_star = decay_point(cf)?;
    loop {
        let scale = t_star / (2.0 * PI);
        let wanted = MIN_TERMS
            .max((PERIOD_PER_Z * scale * z).min(1e18).ceil() as usize)
            .max((PERIOD_PER_TAIL * scale * cf.tail_scale()).min(1e18).ceil() as usize);
        if wanted > MAX_TERMS {
            log::warn!("inversion at z={z} wants {wanted} terms; capped at {MAX_TERMS}");
        }
        let terms = wanted.min(MAX_TERMS);
        let mu = t_star / terms as f64;
        let u = terms as f64 + 0.5;
        if cf_theta(u * mu, cf).norm() / u < CF_CUTOFF {
            return InversionParams::new(mu, terms);
        }
        t_star *= 2.0;
        if t_star > 40f64.exp2() {
            return Err(Error::NonDecayingCf { threshold: CF_CUTOFF });
        }
    }
}

/// Leading-order aliased mass `a * sum_{k odd} (1/(z + kL) - 1/(z + (k+1)L))`
/// for a tail `P(Theta > x) ~ a / x`.
pub fn tail_aliasing(z: f64, period: f64, tail_scale: f64) -> f64 {
    const PAIRS: usize = 4096;
    let mut acc = 0.0;
    for j in 0..PAIRS {
        let lo = z + (2 * j + 1) as f64 * period;
        acc += period / (lo * (lo + period));
    }
    // remaining pairs by the integral of the same summand
    acc += 0.5 / (z + (2 * PAIRS) as f64 * period + 1.5 * period);
    tail_scale * acc
}

fn clamp_logged(z: f64, raw: f64) -> f64 {
    if !(-1e-3..=1.0 + 1e-3).contains(&raw) {
        log::warn!("inversion at z={z} left [0,1] by more than 1e-3 (raw {raw}); clamping");
    }
    raw.clamp(0.0, 1.0)
}

/// `P(Theta < z)` with auto-tuned parameters and the tail aliasing removed.
/// `z <= 0` gives 0.
pub fn theta_cdf(z: f64, cf: &CfSpec) -> Result<f64> {
    if z <= 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    let p = auto_tune_inversion(cf, z)?;
    let raw = gil_pelaez_raw(z, &p, cf) - tail_aliasing(z, 2.0 * PI / p.mu, cf.tail_scale());
    Ok(clamp_logged(z, raw))
}

/// Unclamped sums at every point of `zs` with one set of CF evaluations.
/// Points outside `(0, inf)` give 0 or 1.
pub fn gil_pelaez_raw_grid(zs: &[f64], p: &InversionParams, cf: &CfSpec) -> Vec<f64> {
    // (t, cf(t) / u) for every term
    let terms: Vec<(f64, Complex64)> = (0..p.terms + 1)
        .into_par_iter()
        .with_min_len(CHUNK)
        .map(|i| {
            let u = i as f64 + 0.5;
            (u * p.mu, cf_theta(u * p.mu, cf) / u)
        })
        .collect();
    zs.iter()
        .map(|&z| {
            if z <= 0.0 {
                return 0.0;
            }
            if z.is_infinite() {
                return 1.0;
            }
            let chunks: Vec<f64> = terms
                .par_chunks(CHUNK)
                .map(|c| {
                    c.iter()
                        .map(|&(t, v)| {
                            let (s, co) = (t * z).sin_cos();
                            co * v.im - s * v.re
                        })
                        .sum()
                })
                .collect();
            0.5 - chunks.iter().sum::<f64>() / PI
        })
        .collect()
}

/// [`gil_pelaez_cdf`] at every point of `zs`.
pub fn gil_pelaez_cdf_grid(zs: &[f64], p: &InversionParams, cf: &CfSpec) -> Vec<f64> {
    let raw = gil_pelaez_raw_grid(zs, p, cf);
    zs.iter().zip(raw).map(|(&z, r)| clamp_logged(z, r)).collect()
}

/// [`theta_cdf`] at every point of `zs`, sharing one set of CF evaluations.
/// Parameters are tuned for the largest point, which only refines the others.
pub fn theta_cdf_grid(zs: &[f64], cf: &CfSpec) -> Result<Vec<f64>> {
    let z_max = zs.iter().copied().filter(|z| z.is_finite()).fold(0.0, f64::max);
    if z_max <= 0.0 {
        return zs.iter().map(|&z| theta_cdf(z, cf)).collect();
    }
    let p = auto_tune_inversion(cf, z_max)?;
    let period = 2.0 * PI / p.mu;
    let raw = gil_pelaez_raw_grid(zs, &p, cf);
    Ok(zs
        .iter()
        .zip(raw)
        .map(|(&z, r)| {
            if z <= 0.0 || z.is_infinite() {
                r
            } else {
                clamp_logged(z, r - tail_aliasing(z, period, cf.tail_scale()))
            }
        })
        .collect())
}
