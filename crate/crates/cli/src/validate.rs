//! Checks the inverted `Theta` CDF of every link against samples of the
//! independent-group model, and confirms that a badly tuned inversion is
//! caught by the same check.

use otfs_cdrt::analysis::{auto_tune_inversion, gil_pelaez_cdf_grid, theta_cdf_grid, CfSpec, InversionParams};
use otfs_cdrt::channel::{group_structure, LinkId};
use otfs_cdrt::montecarlo::{empirical_cdf, sample_theta, McConfig, ThetaSampling};
use otfs_cdrt::protocol::Scenario;

/// Sup-norm tolerance between inverted and empirical CDF.
pub const TOLERANCE: f64 = 0.01;

/// Links whose `Theta` enters an outage expression.
pub const LINKS: [LinkId; 4] = [LinkId::ScT1, LinkId::SrT1, LinkId::ScT2, LinkId::ReT2];

#[derive(Debug, Clone, PartialEq)]
pub struct LinkCheck {
    pub link: LinkId,
    pub groups: usize,
    pub sup_norm: f64,
    /// Same check with `mu` scaled up and `I` scaled down by `CONTROL_FACTOR`.
    pub control_sup_norm: f64,
}

impl LinkCheck {
    pub fn passed(&self) -> bool {
        self.sup_norm <= TOLERANCE && self.control_sup_norm > TOLERANCE
    }
}

pub const CONTROL_FACTOR: f64 = 100.0;

/// 99 interior quantiles of a sorted sample.
pub fn quantile_grid(sorted: &[f64]) -> Vec<f64> {
    (1..100).map(|q| sorted[q * sorted.len() / 100]).collect()
}

fn sup_gap(sorted: &[f64], zs: &[f64], cdf: &[f64]) -> f64 {
    zs.iter().zip(cdf).map(|(&z, &f)| (f - empirical_cdf(sorted, z)).abs()).fold(0.0, f64::max)
}

pub fn check_link(s: &Scenario, link: LinkId, mc: &McConfig) -> anyhow::Result<LinkCheck> {
    let profile = s.profiles.get(link);
    let groups = group_structure(profile, &s.frame)?;
    let cf = CfSpec::from_groups(&groups, profile.omega_total)?;
    let samples = sample_theta(profile, &s.frame, mc, ThetaSampling::Model)?;
    let zs = quantile_grid(&samples);
    let sup_norm = sup_gap(&samples, &zs, &theta_cdf_grid(&zs, &cf)?);

    let zmax = zs.iter().copied().fold(0.0, f64::max);
    let tuned = auto_tune_inversion(&cf, zmax)?;
    let bad = InversionParams::new(
        tuned.mu * CONTROL_FACTOR,
        ((tuned.terms as f64 / CONTROL_FACTOR) as usize).max(1),
    )?;
    let control_sup_norm = sup_gap(&samples, &zs, &gil_pelaez_cdf_grid(&zs, &bad, &cf));
    Ok(LinkCheck { link, groups: groups.num_groups(), sup_norm, control_sup_norm })
}

pub fn validate(s: &Scenario, mc: &McConfig) -> anyhow::Result<Vec<LinkCheck>> {
    LINKS.iter().map(|&link| check_link(s, link, mc)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    #[test]
    fn general_links_pass_and_control_fails() {
        let cfg = Config::default().resolve().unwrap();
        let s = cfg.scenario(10.0, otfs_cdrt::protocol::Scheme::Proposed);
        let check = check_link(&s, LinkId::ScT1, &McConfig::new(200_000, 4)).unwrap();
        assert!(check.groups > 1);
        assert!(check.sup_norm <= TOLERANCE, "{check:?}");
        assert!(check.control_sup_norm > TOLERANCE, "{check:?}");
        assert!(check.passed());
    }
}
