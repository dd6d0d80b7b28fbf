//! Two-phase OTFS-NOMA coordinated direct and relay transmission, plus the
//! four-phase OMA and two-phase non-cooperative (nCDRT) baselines.
//!
//! Phase 1: the source superposes `x_c` (near user) and `x_e` (far user).
//! The near user decodes `x_e` then `x_c` by SIC; the relay decodes `x_e`
//! treating `x_c` as noise. Phase 2: the relay forwards `x_e` to the far user
//! while the source sends fresh symbols `x̄_c` to the near user, which first
//! cancels the relay's signal using its phase-1 copy of `x_e`.
//!
//! After ZF every symbol of a frame sees the same SINR, so one SINR per
//! signal per trial fully describes the outcome. Noise variance is 1; the
//! SNRs carry all scaling.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_gaussian, ChannelProfile, ChannelRealization, LinkId, SpectrumPlan};
use crate::error::{Error, Result};
use crate::frame::FrameParams;
use crate::modem::{
    add_noise, apply_dd_channel, random_symbols, superpose, Constellation, OtfsTransform,
    PowerAllocation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Proposed,
    Oma,
    Ncdrt,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::Oma, Scheme::Ncdrt];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Oma => "oma",
            Scheme::Ncdrt => "ncdrt",
        }
    }

    /// Number of orthogonal phases; the rate pre-log is its inverse.
    pub fn phases(&self) -> u32 {
        match self {
            Scheme::Oma => 4,
            Scheme::Proposed | Scheme::Ncdrt => 2,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown scheme {s:?}")))
    }
}

/// Target rates in bits per channel use, shared by every symbol of a signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTargets {
    pub r_xc: f64,
    pub r_xe: f64,
    pub r_xbarc: f64,
}

/// SINR threshold for rate `r` when the signal occupies one of `phases` slots:
/// `(1/phases) log2(1 + g) > r`.
pub fn sinr_threshold(r: f64, phases: u32) -> f64 {
    (phases as f64 * r).exp2() - 1.0
}

impl RateTargets {
    pub fn new(r_xc: f64, r_xe: f64, r_xbarc: f64) -> Result<Self> {
        let r = Self { r_xc, r_xe, r_xbarc };
        r.check()?;
        Ok(r)
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [("r_xc", self.r_xc), ("r_xe", self.r_xe), ("r_xbarc", self.r_xbarc)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidScenario(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `(phi_xc, phi_xe, phi_xbarc)` for a scheme with `phases` slots.
    pub fn thresholds(&self, phases: u32) -> Thresholds {
        Thresholds {
            xc: sinr_threshold(self.r_xc, phases),
            xe: sinr_threshold(self.r_xe, phases),
            xbarc: sinr_threshold(self.r_xbarc, phases),
        }
    }

    pub fn sum(&self) -> f64 {
        self.r_xc + self.r_xe + self.r_xbarc
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub xc: f64,
    pub xe: f64,
    pub xbarc: f64,
}

/// NOMA is only decodable when `alpha_e / alpha_c > phi_xe`.
pub fn noma_feasible(alloc: &PowerAllocation, phi_xe: f64) -> bool {
    alloc.alpha_e > phi_xe * alloc.alpha_c
}

/// Channel profiles of every link in the protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkProfiles {
    pub sc_t1: ChannelProfile,
    pub sr_t1: ChannelProfile,
    pub sc_t2: ChannelProfile,
    pub rc_t2: ChannelProfile,
    pub re_t2: ChannelProfile,
}

impl LinkProfiles {
    /// Same taps on every link, per-link total power from `omega`.
    pub fn uniform(k: &[usize], l: &[usize], omega: impl Fn(LinkId) -> f64) -> Result<Self> {
        let p = |id| ChannelProfile::from_taps(k, l, omega(id), id);
        Ok(Self {
            sc_t1: p(LinkId::ScT1)?,
            sr_t1: p(LinkId::SrT1)?,
            sc_t2: p(LinkId::ScT2)?,
            rc_t2: p(LinkId::RcT2)?,
            re_t2: p(LinkId::ReT2)?,
        })
    }

    pub fn get(&self, id: LinkId) -> &ChannelProfile {
        match id {
            LinkId::ScT1 => &self.sc_t1,
            LinkId::SrT1 => &self.sr_t1,
            LinkId::ScT2 => &self.sc_t2,
            LinkId::RcT2 => &self.rc_t2,
            LinkId::ReT2 => &self.re_t2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub frame: FrameParams,
    pub profiles: LinkProfiles,
    pub alloc: PowerAllocation,
    /// `P_s / sigma^2`, linear.
    pub rho_s: f64,
    /// `P_r / sigma^2`, linear.
    pub rho_r: f64,
    pub rates: RateTargets,
    pub scheme: Scheme,
    /// Make phase-2 decoding of `x̄_c` depend on the near user's phase-1 SIC
    /// of `x_e` (needed to cancel the relay's signal). Off by default.
    #[serde(default)]
    pub xbarc_needs_sic: bool,
    #[serde(default)]
    pub constellation: Constellation,
}

impl Scenario {
    pub fn check(&self) -> Result<()> {
        self.frame.check()?;
        self.alloc.check()?;
        self.rates.check()?;
        for id in LinkId::ALL {
            let p = self.profiles.get(id);
            p.check()?;
            p.check_frame(&self.frame)?;
        }
        for (name, v) in [("rho_s", self.rho_s), ("rho_r", self.rho_r)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidScenario(format!("{name} must be positive, got {v}")));
            }
        }
        if self.profiles.sr_t1.omega_total >= self.profiles.sc_t1.omega_total {
            return Err(Error::InvalidScenario(format!(
                "relay link must be weaker than the direct link in phase 1 (omega_sr={} >= omega_sc={})",
                self.profiles.sr_t1.omega_total, self.profiles.sc_t1.omega_total
            )));
        }
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        self.frame.size()
    }
}

/// Per-trial SINRs. For OMA the fields hold the corresponding single-signal
/// SINRs: `g_c_xe_t1` is unused (0) and `g_r_xe_t1` is the source-relay hop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SinrSet {
    pub g_c_xe_t1: f64,
    pub g_c_xc_t1: f64,
    pub g_r_xe_t1: f64,
    pub g_c_xbarc_t2: f64,
    pub g_e_xe_t2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub outage_xc: bool,
    pub outage_xe: bool,
    pub outage_xbarc: bool,
}

/// Returns `(g_c_xe_t1, g_c_xc_t1, g_r_xe_t1)`.
pub fn sinr_phase1(
    theta_sc: f64,
    theta_sr: f64,
    alloc: &PowerAllocation,
    rho_s: f64,
    nm: usize,
) -> (f64, f64, f64) {
    let nm = nm as f64;
    let xe = |theta: f64| {
        if theta.is_infinite() {
            0.0
        } else {
            alloc.alpha_e * rho_s / (alloc.alpha_c * rho_s + theta / nm)
        }
    };
    let xc = if theta_sc.is_infinite() { 0.0 } else { nm * alloc.alpha_c * rho_s / theta_sc };
    (xe(theta_sc), xc, xe(theta_sr))
}

/// Interference-free ZF SINR `rho * NM / theta` (0 for a singular channel).
pub fn sinr_direct(theta: f64, rho: f64, nm: usize) -> f64 {
    if theta.is_infinite() {
        0.0
    } else {
        rho * nm as f64 / theta
    }
}

/// Returns `(g_c_xbarc_t2, g_e_xe_t2)`. The relay's `x_e` must already be
/// cancelled at the near user.
pub fn sinr_phase2(theta_sc2: f64, theta_re2: f64, rho_s: f64, rho_r: f64, nm: usize) -> (f64, f64) {
    (sinr_direct(theta_sc2, rho_s, nm), sinr_direct(theta_re2, rho_r, nm))
}

/// Outage decisions for the proposed scheme.
pub fn decide_outages(
    s: &SinrSet,
    rates: &RateTargets,
    alloc: &PowerAllocation,
    xbarc_needs_sic: bool,
) -> TrialOutcome {
    let phi = rates.thresholds(2);
    let feasible = noma_feasible(alloc, phi.xe);
    let sic_ok = feasible && s.g_c_xe_t1 > phi.xe;
    let outage_xc = !(sic_ok && s.g_c_xc_t1 > phi.xc);
    let outage_xe = !(feasible && s.g_r_xe_t1 > phi.xe && s.g_e_xe_t2 > phi.xe);
    let mut outage_xbarc = !(s.g_c_xbarc_t2 > phi.xbarc);
    if xbarc_needs_sic && !sic_ok {
        outage_xbarc = true;
    }
    TrialOutcome { outage_xc, outage_xe, outage_xbarc }
}

/// Outage decisions for the four-phase OMA baseline (thresholds `2^{4R} - 1`).
pub fn decide_outages_oma(s: &SinrSet, rates: &RateTargets) -> TrialOutcome {
    let phi = rates.thresholds(4);
    TrialOutcome {
        outage_xc: !(s.g_c_xc_t1 > phi.xc),
        outage_xe: !(s.g_r_xe_t1 > phi.xe && s.g_e_xe_t2 > phi.xe),
        outage_xbarc: !(s.g_c_xbarc_t2 > phi.xbarc),
    }
}

/// Per-link spectrum plans for a scenario, built once and reused across trials.
#[derive(Debug, Clone)]
pub struct TrialEngine {
    scenario: Scenario,
    plans: [SpectrumPlan; 5],
}

fn draw_gains<R: Rng + ?Sized>(profile: &ChannelProfile, rng: &mut R) -> Vec<Complex64> {
    let var = profile.path_power();
    profile.paths.iter().map(|_| complex_gaussian(rng, var)).collect()
}

impl TrialEngine {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.check()?;
        let plan = |id| SpectrumPlan::new(scenario.profiles.get(id), &scenario.frame);
        Ok(Self {
            scenario: scenario.clone(),
            plans: [
                plan(LinkId::ScT1)?,
                plan(LinkId::SrT1)?,
                plan(LinkId::ScT2)?,
                plan(LinkId::RcT2)?,
                plan(LinkId::ReT2)?,
            ],
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn plan(&self, id: LinkId) -> &SpectrumPlan {
        let i = LinkId::ALL.iter().position(|&v| v == id).unwrap();
        &self.plans[i]
    }

    /// Draws one independent realization of `id` and returns its theta.
    fn draw_theta<R: Rng + ?Sized>(&self, id: LinkId, rng: &mut R) -> f64 {
        let gains = draw_gains(self.scenario.profiles.get(id), rng);
        self.plan(id).theta(&gains)
    }

    /// SINRs of one trial under the scenario's scheme.
    pub fn draw_sinrs<R: Rng + ?Sized>(&self, rng: &mut R) -> SinrSet {
        let s = &self.scenario;
        let nm = s.grid_size();
        match s.scheme {
            Scheme::Proposed | Scheme::Ncdrt => {
                let th_sc1 = self.draw_theta(LinkId::ScT1, rng);
                let th_sr1 = self.draw_theta(LinkId::SrT1, rng);
                let th_re2 = self.draw_theta(LinkId::ReT2, rng);
                let (g_c_xe_t1, g_c_xc_t1, g_r_xe_t1) = sinr_phase1(th_sc1, th_sr1, &s.alloc, s.rho_s, nm);
                let g_e_xe_t2 = sinr_direct(th_re2, s.rho_r, nm);
                let g_c_xbarc_t2 = if s.scheme == Scheme::Proposed {
                    sinr_direct(self.draw_theta(LinkId::ScT2, rng), s.rho_s, nm)
                } else {
                    0.0
                };
                SinrSet { g_c_xe_t1, g_c_xc_t1, g_r_xe_t1, g_c_xbarc_t2, g_e_xe_t2 }
            }
            Scheme::Oma => {
                let th_xc = self.draw_theta(LinkId::ScT1, rng);
                let th_xbarc = self.draw_theta(LinkId::ScT2, rng);
                let th_sr = self.draw_theta(LinkId::SrT1, rng);
                let th_re = self.draw_theta(LinkId::ReT2, rng);
                SinrSet {
                    g_c_xe_t1: 0.0,
                    g_c_xc_t1: sinr_direct(th_xc, s.rho_s, nm),
                    g_r_xe_t1: sinr_direct(th_sr, s.rho_s, nm),
                    g_c_xbarc_t2: sinr_direct(th_xbarc, s.rho_s, nm),
                    g_e_xe_t2: sinr_direct(th_re, s.rho_r, nm),
                }
            }
        }
    }

    pub fn decide(&self, sinrs: &SinrSet) -> TrialOutcome {
        let s = &self.scenario;
        match s.scheme {
            Scheme::Proposed => decide_outages(sinrs, &s.rates, &s.alloc, s.xbarc_needs_sic),
            Scheme::Ncdrt => TrialOutcome {
                outage_xbarc: true,
                ..decide_outages(sinrs, &s.rates, &s.alloc, false)
            },
            Scheme::Oma => decide_outages_oma(sinrs, &s.rates),
        }
    }

    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        let sinrs = self.draw_sinrs(rng);
        self.decide(&sinrs)
    }
}

/// One trial of the scenario's scheme.
pub fn run_trial<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<TrialOutcome> {
    Ok(TrialEngine::new(s)?.run_trial(rng))
}

pub fn run_trial_oma<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<TrialOutcome> {
    run_trial(&Scenario { scheme: Scheme::Oma, ..s.clone() }, rng)
}

pub fn run_trial_ncdrt<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<TrialOutcome> {
    run_trial(&Scenario { scheme: Scheme::Ncdrt, ..s.clone() }, rng)
}

/// Measured SINRs from running the full symbol chain of the proposed scheme.
#[derive(Debug, Clone)]
pub struct ChainReport {
    /// SINRs predicted from the drawn channels.
    pub formula: SinrSet,
    /// SINRs measured from equalised symbols over all noise draws.
    pub measured: SinrSet,
    /// Mean equalised noise power at each symbol index, near user, phase 1.
    pub per_symbol_noise: Vec<f64>,
    pub outcome: TrialOutcome,
}

/// Draws one channel set, then pushes `frames` independent payload and noise
/// draws through superposition, the DD channels, ZF and SIC.
pub fn run_trial_chain<R: Rng + ?Sized>(s: &Scenario, frames: usize, rng: &mut R) -> Result<ChainReport> {
    s.check()?;
    if s.scheme != Scheme::Proposed {
        return Err(Error::InvalidScenario("the symbol chain models the proposed scheme only".into()));
    }
    let frame = &s.frame;
    let nm = frame.size();
    let draw = |id: LinkId, rng: &mut R| {
        let p = s.profiles.get(id);
        ChannelRealization { profile: p.clone(), gains: draw_gains(p, rng) }
    };
    let sc1 = draw(LinkId::ScT1, rng);
    let sr1 = draw(LinkId::SrT1, rng);
    let sc2 = draw(LinkId::ScT2, rng);
    let rc2 = draw(LinkId::RcT2, rng);
    let re2 = draw(LinkId::ReT2, rng);

    let spectrum = |r: &ChannelRealization| SpectrumPlan::new(&r.profile, frame).map(|p| p.spectrum(&r.gains));
    let (spec_sc1, spec_sr1, spec_sc2, spec_re2) =
        (spectrum(&sc1)?, spectrum(&sr1)?, spectrum(&sc2)?, spectrum(&re2)?);
    let th = crate::channel::theta;
    let (g_c_xe_t1, g_c_xc_t1, g_r_xe_t1) = sinr_phase1(th(&spec_sc1), th(&spec_sr1), &s.alloc, s.rho_s, nm);
    let (g_c_xbarc_t2, g_e_xe_t2) = sinr_phase2(th(&spec_sc2), th(&spec_re2), s.rho_s, s.rho_r, nm);
    let formula = SinrSet { g_c_xe_t1, g_c_xc_t1, g_r_xe_t1, g_c_xbarc_t2, g_e_xe_t2 };

    let tx = OtfsTransform::new(frame);
    let (ps, pr) = (s.rho_s.sqrt(), s.rho_r.sqrt());
    let (ac, ae) = (s.alloc.alpha_c.sqrt(), s.alloc.alpha_e.sqrt());
    // accumulated error power: [c_xe_t1, c_xc_t1, r_xe_t1, c_xbarc_t2, e_xe_t2]
    let mut err = [0.0f64; 5];
    let mut per_symbol_noise = vec![0.0; nm];
    let scaled = |g: crate::modem::DdGrid, a: f64| g.0.into_iter().map(|v| v * a).collect::<Vec<_>>();

    for _ in 0..frames {
        let x_c = random_symbols(rng, nm, s.constellation);
        let x_e = random_symbols(rng, nm, s.constellation);
        let x_bar = random_symbols(rng, nm, s.constellation);
        let x_s = superpose(&x_c, &x_e, &s.alloc)?;

        // phase 1 at the near user and the relay
        for (link, spec, is_near) in [(&sc1, &spec_sc1, true), (&sr1, &spec_sr1, false)] {
            let mut y = scaled(apply_dd_channel(link, &x_s, frame)?, ps);
            add_noise(&mut y, 1.0, rng);
            let eq = tx.zf_equalize(&y, spec)?;
            for i in 0..nm {
                let after_xe = eq[i] - x_e.0[i] * (ae * ps);
                if is_near {
                    err[0] += after_xe.norm_sqr();
                    let noise = (after_xe - x_c.0[i] * (ac * ps)).norm_sqr();
                    err[1] += noise;
                    per_symbol_noise[i] += noise;
                } else {
                    err[2] += after_xe.norm_sqr();
                }
            }
        }

        // phase 2 at the near user, relay signal cancelled with the known x_e
        let mut y = scaled(apply_dd_channel(&sc2, &x_bar, frame)?, ps);
        let relay = scaled(apply_dd_channel(&rc2, &x_e, frame)?, pr);
        add_noise(&mut y, 1.0, rng);
        let received: Vec<Complex64> = y.iter().zip(&relay).map(|(v, r)| v + r).collect();
        // reconstruction of the relay term from the phase-1 decision on x_e
        let y: Vec<Complex64> = received.iter().zip(&relay).map(|(v, r)| v - r).collect();
        let eq = tx.zf_equalize(&y, &spec_sc2)?;
        err[3] += eq.iter().zip(&x_bar.0).map(|(v, x)| (v - x * ps).norm_sqr()).sum::<f64>();

        // phase 2 at the far user
        let mut y = scaled(apply_dd_channel(&re2, &x_e, frame)?, pr);
        add_noise(&mut y, 1.0, rng);
        let eq = tx.zf_equalize(&y, &spec_re2)?;
        err[4] += eq.iter().zip(&x_e.0).map(|(v, x)| (v - x * pr).norm_sqr()).sum::<f64>();
    }

    let count = (frames * nm) as f64;
    let mean = |e: f64| e / count;
    let measured = SinrSet {
        g_c_xe_t1: s.alloc.alpha_e * s.rho_s / mean(err[0]),
        g_c_xc_t1: s.alloc.alpha_c * s.rho_s / mean(err[1]),
        g_r_xe_t1: s.alloc.alpha_e * s.rho_s / mean(err[2]),
        g_c_xbarc_t2: s.rho_s / mean(err[3]),
        g_e_xe_t2: s.rho_r / mean(err[4]),
    };
    per_symbol_noise.iter_mut().for_each(|v| *v /= frames as f64);
    let outcome = decide_outages(&formula, &s.rates, &s.alloc, s.xbarc_needs_sic);
    Ok(ChainReport { formula, measured, per_symbol_noise, outcome })
}
