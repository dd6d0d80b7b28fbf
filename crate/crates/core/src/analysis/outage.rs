//! Outage probabilities and outage sum rate.
//!
//! All three signals of the proposed scheme reduce to events on `Theta` of a
//! single link:
//!
//! * `x_c`: `Theta_sc1 < xi_1`, with `xi_1 = min{NM (a_e - phi_xe a_c) rho_s / phi_xe, NM a_c rho_s / phi_xc}`
//! * `x_e`: `Theta_sr1 < xi_2` and `Theta_re2 < xi_3`
//! * `x̄_c`: `Theta_sc2 < xi_4`
//!
//! When every eigenvalue of a link shares one modulus (`G = 1`),
//! `Theta = NM / |lambda|^2` and the CDF is `exp(-NM / (Omega z))`.

use super::cf::CfSpec;
use super::inversion::theta_cdf;
use crate::channel::{group_structure, LinkId};
use crate::error::Result;
use crate::modem::PowerAllocation;
use crate::protocol::{noma_feasible, RateTargets, Scenario, Scheme, Thresholds};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageInputs {
    pub alloc: PowerAllocation,
    pub rho_s: f64,
    pub rho_r: f64,
    /// Grid size `N * M`.
    pub nm: usize,
    pub rates: RateTargets,
}

impl OutageInputs {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self { alloc: s.alloc, rho_s: s.rho_s, rho_r: s.rho_r, nm: s.grid_size(), rates: s.rates }
    }

    pub fn thresholds(&self) -> Thresholds {
        self.rates.thresholds(2)
    }

    pub fn feasible(&self) -> bool {
        noma_feasible(&self.alloc, self.thresholds().xe)
    }

    fn nm(&self) -> f64 {
        self.nm as f64
    }

    /// `a_e - phi_xe a_c`, the SIC margin.
    fn margin(&self) -> f64 {
        self.alloc.alpha_e - self.thresholds().xe * self.alloc.alpha_c
    }

    pub fn xi1(&self) -> f64 {
        let phi = self.thresholds();
        let sic = self.nm() * self.margin() * self.rho_s / phi.xe;
        let own = self.nm() * self.alloc.alpha_c * self.rho_s / phi.xc;
        sic.min(own)
    }

    pub fn xi2(&self) -> f64 {
        self.nm() * self.margin() * self.rho_s / self.thresholds().xe
    }

    pub fn xi3(&self) -> f64 {
        self.nm() * self.rho_r / self.thresholds().xe
    }

    pub fn xi4(&self) -> f64 {
        self.nm() * self.rho_s / self.thresholds().xbarc
    }

    pub fn xi5(&self) -> f64 {
        let phi = self.thresholds();
        (phi.xe / (self.margin() * self.rho_s)).max(phi.xc / (self.alloc.alpha_c * self.rho_s))
    }
}

/// Per-signal outage probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutageTriple {
    pub xc: f64,
    pub xe: f64,
    pub xbarc: f64,
}

pub fn outage_xc_general(inp: &OutageInputs, cf_sc1: &CfSpec) -> Result<f64> {
    if !inp.feasible() {
        return Ok(1.0);
    }
    Ok(1.0 - theta_cdf(inp.xi1(), cf_sc1)?)
}

pub fn outage_xe_general(inp: &OutageInputs, cf_sr1: &CfSpec, cf_re2: &CfSpec) -> Result<f64> {
    if !inp.feasible() {
        return Ok(1.0);
    }
    Ok(1.0 - theta_cdf(inp.xi2(), cf_sr1)? * theta_cdf(inp.xi3(), cf_re2)?)
}

pub fn outage_xbarc_general(inp: &OutageInputs, cf_sc2: &CfSpec) -> Result<f64> {
    Ok(1.0 - theta_cdf(inp.xi4(), cf_sc2)?)
}

/// Average link powers entering the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkOmegas {
    pub sc_t1: f64,
    pub sr_t1: f64,
    pub sc_t2: f64,
    pub re_t2: f64,
}

impl LinkOmegas {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            sc_t1: s.profiles.sc_t1.omega_total,
            sr_t1: s.profiles.sr_t1.omega_total,
            sc_t2: s.profiles.sc_t2.omega_total,
            re_t2: s.profiles.re_t2.omega_total,
        }
    }
}

/// `1 - exp(-x)` without cancellation for small `x`.
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Closed forms for single-group links.
pub fn outage_special(inp: &OutageInputs, omegas: &LinkOmegas) -> OutageTriple {
    let phi = inp.thresholds();
    let xbarc = one_minus_exp_neg(phi.xbarc / (inp.rho_s * omegas.sc_t2));
    if !inp.feasible() {
        return OutageTriple { xc: 1.0, xe: 1.0, xbarc };
    }
    let xc = one_minus_exp_neg(inp.xi5() / omegas.sc_t1);
    let relay_hop = phi.xe / (inp.margin() * inp.rho_s * omegas.sr_t1);
    let far_hop = phi.xe / (inp.rho_r * omegas.re_t2);
    let xe = one_minus_exp_neg(relay_hop + far_hop);
    OutageTriple { xc, xe, xbarc }
}

/// Normalised outage sum rate of the proposed scheme, in BPCU.
pub fn outage_sum_rate(p_xc: f64, p_xe: f64, p_xbarc: f64, rates: &RateTargets) -> f64 {
    ((1.0 - p_xc) * rates.r_xc + (1.0 - p_xe) * rates.r_xe + (1.0 - p_xbarc) * rates.r_xbarc) / 2.0
}

/// Sum rate for any scheme: nCDRT has no `x̄_c` term, OMA has a 1/4 pre-log.
pub fn scheme_sum_rate(scheme: Scheme, p: &OutageTriple, rates: &RateTargets) -> f64 {
    match scheme {
        Scheme::Proposed => outage_sum_rate(p.xc, p.xe, p.xbarc, rates),
        Scheme::Ncdrt => ((1.0 - p.xc) * rates.r_xc + (1.0 - p.xe) * rates.r_xe) / 2.0,
        Scheme::Oma => {
            ((1.0 - p.xc) * rates.r_xc + (1.0 - p.xe) * rates.r_xe + (1.0 - p.xbarc) * rates.r_xbarc)
                / 4.0
        }
    }
}

/// Distribution of `Theta` on one link.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaLaw {
    /// One eigenvalue group: `P(Theta < z) = exp(-NM / (Omega z))`.
    SingleGroup { nm: usize, omega: f64 },
    /// Independent-group model inverted from its CF.
    Groups(CfSpec),
}

impl ThetaLaw {
    pub fn from_cf(cf: CfSpec) -> Self {
        if cf.num_groups() == 1 {
            ThetaLaw::SingleGroup { nm: cf.total(), omega: cf.omega() }
        } else {
            ThetaLaw::Groups(cf)
        }
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        match self {
            ThetaLaw::SingleGroup { nm, omega } => {
                if z <= 0.0 {
                    Ok(0.0)
                } else {
                    Ok((-(*nm as f64) / (omega * z)).exp())
                }
            }
            ThetaLaw::Groups(cf) => theta_cdf(z, cf),
        }
    }

    pub fn is_single_group(&self) -> bool {
        matches!(self, ThetaLaw::SingleGroup { .. })
    }

    /// The CF description, also for single-group links.
    pub fn cf(&self) -> Result<CfSpec> {
        match self {
            ThetaLaw::SingleGroup { nm, omega } => CfSpec::single(*nm, *omega),
            ThetaLaw::Groups(cf) => Ok(cf.clone()),
        }
    }
}

/// `Theta` laws of the four links that enter the outage expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkLaws {
    pub sc_t1: ThetaLaw,
    pub sr_t1: ThetaLaw,
    pub sc_t2: ThetaLaw,
    pub re_t2: ThetaLaw,
}

impl LinkLaws {
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        let law = |id: LinkId| -> Result<ThetaLaw> {
            let p = s.profiles.get(id);
            let g = group_structure(p, &s.frame)?;
            Ok(ThetaLaw::from_cf(CfSpec::from_groups(&g, p.omega_total)?))
        };
        Ok(Self {
            sc_t1: law(LinkId::ScT1)?,
            sr_t1: law(LinkId::SrT1)?,
            sc_t2: law(LinkId::ScT2)?,
            re_t2: law(LinkId::ReT2)?,
        })
    }

    pub fn all_single_group(&self) -> bool {
        [&self.sc_t1, &self.sr_t1, &self.sc_t2, &self.re_t2].iter().all(|l| l.is_single_group())
    }
}

/// Analytic outage of `scheme`. The proposed scheme uses the closed forms
/// when every link is single-group and CF inversion otherwise.
pub fn analytic_outage(scheme: Scheme, inp: &OutageInputs, laws: &LinkLaws) -> Result<OutageTriple> {
    let nm = inp.nm as f64;
    match scheme {
        Scheme::Proposed | Scheme::Ncdrt => {
            let mut p = if laws.all_single_group() {
                let omegas = LinkOmegas {
                    sc_t1: single_omega(&laws.sc_t1),
                    sr_t1: single_omega(&laws.sr_t1),
                    sc_t2: single_omega(&laws.sc_t2),
                    re_t2: single_omega(&laws.re_t2),
                };
                outage_special(inp, &omegas)
            } else if inp.feasible() {
                OutageTriple {
                    xc: 1.0 - laws.sc_t1.cdf(inp.xi1())?,
                    xe: 1.0 - laws.sr_t1.cdf(inp.xi2())? * laws.re_t2.cdf(inp.xi3())?,
                    xbarc: 1.0 - laws.sc_t2.cdf(inp.xi4())?,
                }
            } else {
                OutageTriple { xc: 1.0, xe: 1.0, xbarc: 1.0 - laws.sc_t2.cdf(inp.xi4())? }
            };
            if scheme == Scheme::Ncdrt {
                p.xbarc = 1.0;
            }
            Ok(p)
        }
        Scheme::Oma => {
            let phi = inp.rates.thresholds(4);
            Ok(OutageTriple {
                xc: 1.0 - laws.sc_t1.cdf(nm * inp.rho_s / phi.xc)?,
                xe: 1.0
                    - laws.sr_t1.cdf(nm * inp.rho_s / phi.xe)? * laws.re_t2.cdf(nm * inp.rho_r / phi.xe)?,
                xbarc: 1.0 - laws.sc_t2.cdf(nm * inp.rho_s / phi.xbarc)?,
            })
        }
    }
}

fn single_omega(law: &ThetaLaw) -> f64 {
    match law {
        ThetaLaw::SingleGroup { omega, .. } => *omega,
        ThetaLaw::Groups(cf) => cf.omega(),
    }
}
