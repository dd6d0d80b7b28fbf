mod common;

use otfs_cdrt::modem::{Constellation, PowerAllocation};
use otfs_cdrt::montecarlo::{estimate_outage, McConfig};
use otfs_cdrt::protocol::{
    run_trial, run_trial_chain, sinr_direct, sinr_phase1, ChainReport, Scheme, SinrSet,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fields(s: &SinrSet) -> [f64; 5] {
    [s.g_c_xe_t1, s.g_c_xc_t1, s.g_r_xe_t1, s.g_c_xbarc_t2, s.g_e_xe_t2]
}

fn chain(seed: u64, constellation: Constellation) -> ChainReport {
    let mut s = common::general(10.0, (1.8, 1.0, 1.0), Scheme::Proposed);
    s.constellation = constellation;
    run_trial_chain(&s, 10_000, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn measured_sinr_matches_formula() {
    for seed in 0..3 {
        let r = chain(seed, Constellation::Qpsk);
        for (got, want) in fields(&r.measured).into_iter().zip(fields(&r.formula)) {
            assert!((got / want - 1.0).abs() < 0.05, "seed {seed}: measured {got}, formula {want}");
        }
    }
}

#[test]
fn every_symbol_sees_the_same_noise_power() {
    // 99th percentile of chi-square with 15 degrees of freedom
    const CRITICAL: f64 = 30.578;
    let frames = 10_000.0;
    for seed in 10..13 {
        let r = chain(seed, Constellation::Qpsk);
        let cells = &r.per_symbol_noise[..16];
        let mean = cells.iter().sum::<f64>() / 16.0;
        // each cell averages `frames` exponential draws, so its variance is mean^2 / frames
        let stat: f64 = cells.iter().map(|v| (v - mean).powi(2) / (mean * mean / frames)).sum();
        assert!(stat < CRITICAL, "seed {seed}: chi-square {stat}");
    }
}

#[test]
fn constellation_does_not_change_outcomes() {
    let qpsk = chain(21, Constellation::Qpsk);
    let gauss = chain(21, Constellation::Gaussian);
    assert_eq!(qpsk.outcome, gauss.outcome);
    assert_eq!(fields(&qpsk.formula), fields(&gauss.formula));
    for (a, b) in fields(&qpsk.measured).into_iter().zip(fields(&gauss.measured)) {
        assert!((a / b - 1.0).abs() < 0.05);
    }

    let mut s = common::general(10.0, (1.8, 1.0, 1.0), Scheme::Proposed);
    let mc = McConfig::new(2000, 5);
    let a = estimate_outage(&s, &mc).unwrap();
    s.constellation = Constellation::Gaussian;
    assert_eq!(a, estimate_outage(&s, &mc).unwrap());
}

#[test]
fn fixed_seed_gives_identical_outcome() {
    let s = common::general(6.0, (1.8, 1.0, 1.0), Scheme::Proposed);
    for seed in 0..20 {
        let a = run_trial(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = run_trial(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn infeasible_split_is_always_outage() {
    for scheme in [Scheme::Proposed, Scheme::Ncdrt] {
        let mut s = common::general(40.0, (1.8, 1.0, 1.0), scheme);
        // alpha_e / alpha_c = 3 = 2^(2 R_xe) - 1
        s.alloc = PowerAllocation::new(0.25, 0.75).unwrap();
        let est = estimate_outage(&s, &McConfig::new(1000, 9)).unwrap();
        assert_eq!(est.xc.p_hat, 1.0);
        assert_eq!(est.xe.p_hat, 1.0);
    }
    let mut s = common::general(40.0, (1.8, 1.0, 1.0), Scheme::Oma);
    s.alloc = PowerAllocation::new(0.25, 0.75).unwrap();
    let est = estimate_outage(&s, &McConfig::new(1000, 9)).unwrap();
    assert!(est.xe.p_hat < 1.0);
}

#[test]
fn relay_link_must_be_weaker_than_direct_link() {
    let mut s = common::general(10.0, (1.8, 1.0, 1.0), Scheme::Proposed);
    s.profiles.sr_t1.omega_total = 1.0;
    assert!(s.check().is_err());
}

#[test]
fn high_snr_removes_xbarc_outage() {
    let s = common::general(60.0, (1.8, 1.0, 1.0), Scheme::Proposed);
    let est = estimate_outage(&s, &McConfig::new(2000, 3)).unwrap();
    assert!(est.xbarc.p_hat < 0.01, "{}", est.xbarc.p_hat);
}

proptest! {
    #[test]
    fn sinrs_fall_with_theta_and_rise_with_snr(
        theta in 1.0f64..1e6,
        dtheta in 0.0f64..1e6,
        rho in 1e-3f64..1e5,
        drho in 0.0f64..1e5,
        alpha_c in 0.01f64..0.49,
    ) {
        let alloc = PowerAllocation::new(alpha_c, 1.0 - alpha_c).unwrap();
        let nm = 512;
        let base = sinr_phase1(theta, theta, &alloc, rho, nm);
        let worse = sinr_phase1(theta + dtheta, theta + dtheta, &alloc, rho, nm);
        let louder = sinr_phase1(theta, theta, &alloc, rho + drho, nm);
        for (b, w, l) in [(base.0, worse.0, louder.0), (base.1, worse.1, louder.1), (base.2, worse.2, louder.2)] {
            prop_assert!(w <= b * (1.0 + 1e-12));
            prop_assert!(l >= b * (1.0 - 1e-12));
        }
        prop_assert!(sinr_direct(theta + dtheta, rho, nm) <= sinr_direct(theta, rho, nm));
        prop_assert!(sinr_direct(theta, rho + drho, nm) >= sinr_direct(theta, rho, nm));
    }
}
