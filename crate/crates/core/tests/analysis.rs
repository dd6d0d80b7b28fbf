mod common;

use num_complex::Complex64;
use otfs_cdrt::analysis::{
    analytic_outage, bessel_k1, cf_theta, outage_special, outage_xbarc_general, outage_xc_general,
    outage_xe_general, psi, scheme_sum_rate, theta_cdf_grid, CfSpec, LinkLaws, LinkOmegas, OutageInputs,
};
use otfs_cdrt::modem::PowerAllocation;
use otfs_cdrt::protocol::{RateTargets, Scheme};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

const SAMPLES: usize = 1_000_000;

/// `sum_g C_g / E_g` with independent `E_g ~ Exp(mean omega)`, sorted.
fn model_samples(mults: &[usize], omega: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exp = Exp::new(1.0 / omega).unwrap();
    let mut v: Vec<f64> =
        (0..SAMPLES).map(|_| mults.iter().map(|&c| c as f64 / exp.sample(&mut rng)).sum()).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn empirical_cf(samples: &[f64], t: f64) -> Complex64 {
    let sum: Complex64 = samples.iter().map(|&x| Complex64::from_polar(1.0, t * x)).sum();
    sum / samples.len() as f64
}

/// Largest gap between the inverted CDF and the empirical CDF over 99 quantiles.
fn inversion_gap(mults: &[usize], omega: f64, seed: u64) -> f64 {
    let samples = model_samples(mults, omega, seed);
    let zs: Vec<f64> = (1..100).map(|q| samples[q * SAMPLES / 100]).collect();
    let cf = CfSpec::new(mults.to_vec(), omega).unwrap();
    let cdf = theta_cdf_grid(&zs, &cf).unwrap();
    zs.iter()
        .zip(&cdf)
        .map(|(&z, &f)| {
            let below = samples.partition_point(|&v| v < z) as f64 / SAMPLES as f64;
            let at_or_below = samples.partition_point(|&v| v <= z) as f64 / SAMPLES as f64;
            (f - below).abs().min((f - at_or_below).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn psi_matches_empirical_cf_of_inverse_exponential() {
    for omega in [1.0, 0.5] {
        let samples = model_samples(&[1], omega, 1);
        assert_eq!(psi(0.0, omega), Complex64::new(1.0, 0.0));
        for t in [0.1, 1.0, 10.0] {
            let d = (psi(t, omega) - empirical_cf(&samples, t)).norm();
            assert!(d <= 0.005, "omega={omega} t={t}: {d}");
        }
    }
}

#[test]
fn psi_is_a_characteristic_function() {
    for i in 0..400 {
        let t = 10f64.powf(-4.0 + 8.0 * i as f64 / 399.0);
        for omega in [0.1, 1.0, 7.0] {
            let v = psi(t, omega);
            assert!(v.norm() <= 1.0 + 1e-12, "t={t}: |psi|={}", v.norm());
            assert_eq!(psi(-t, omega), v.conj());
        }
    }
}

/// Trapezoid rule on `K1(z) = int_0^inf exp(-z cosh t) cosh t dt`, valid for `Re z > 0`.
fn k1_quadrature(z: Complex64) -> Complex64 {
    let h = 2e-4;
    let t_max = (60.0 / z.re).max(1.0).acosh() + 1.0;
    let steps = (t_max / h).ceil() as usize;
    let f = |t: f64| (-z * t.cosh()).exp() * t.cosh();
    let mut acc = f(0.0) * 0.5;
    for i in 1..=steps {
        acc += f(i as f64 * h);
    }
    acc * h
}

#[test]
fn bessel_matches_quadrature_on_the_cf_ray() {
    // z = 2 sqrt(-j t / omega) lies on arg z = -pi/4
    let dir = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    for i in 0..120 {
        let r = 10f64.powf(-3.0 + 4.7 * i as f64 / 119.0);
        let z = dir * r;
        let got = bessel_k1(z).unwrap();
        let want = k1_quadrature(z);
        let rel = (got - want).norm() / want.norm();
        assert!(rel < 1e-10, "|z|={r}: rel {rel}");
    }
}

#[test]
fn cf_theta_matches_model_samples() {
    for mults in [vec![16, 48], vec![8, 8, 16, 32], vec![4, 4, 8, 8, 8, 8, 12, 12]] {
        let samples = model_samples(&mults, 1.0, 2);
        let cf = CfSpec::new(mults.clone(), 1.0).unwrap();
        for t in [1e-3, 1e-2, 0.03, 0.1, 0.3] {
            let d = (cf_theta(t, &cf) - empirical_cf(&samples, t)).norm();
            assert!(d <= 0.01, "{mults:?} t={t}: {d}");
        }
    }
}

#[test]
fn inversion_matches_model_for_several_groups() {
    for (mults, seed) in
        [(vec![16, 48], 3), (vec![8, 8, 16, 32], 4), (vec![4, 4, 8, 8, 8, 8, 12, 12], 5)]
    {
        let gap = inversion_gap(&mults, 1.0, seed);
        assert!(gap <= 0.01, "G={}: sup-norm {gap}", mults.len());
    }
}

#[test]
fn general_pipeline_reduces_to_closed_forms_for_one_group() {
    let s = common::special(0.0, (1.8, 1.0, 1.0), Scheme::Proposed);
    let omegas = LinkOmegas::from_scenario(&s);
    let nm = s.grid_size();
    let cf = |omega| CfSpec::single(nm, omega).unwrap();
    for snr_db in [0.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0] {
        for rates in [(1.8, 1.0, 1.0), (0.6, 0.6, 0.3)] {
            let inp = OutageInputs::from_scenario(&common::special(snr_db, rates, Scheme::Proposed));
            let closed = outage_special(&inp, &omegas);
            let xc = outage_xc_general(&inp, &cf(omegas.sc_t1)).unwrap();
            let xe = outage_xe_general(&inp, &cf(omegas.sr_t1), &cf(omegas.re_t2)).unwrap();
            let xbarc = outage_xbarc_general(&inp, &cf(omegas.sc_t2)).unwrap();
            for (name, a, b) in [("xc", xc, closed.xc), ("xe", xe, closed.xe), ("xbarc", xbarc, closed.xbarc)] {
                assert!((a - b).abs() <= 1e-3, "{snr_db} dB {rates:?} {name}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn high_snr_sum_rate_reaches_the_ceiling() {
    let s = common::general(60.0, (1.8, 1.0, 1.0), Scheme::Proposed);
    let inp = OutageInputs::from_scenario(&s);
    let laws = LinkLaws::from_scenario(&s).unwrap();
    let p = analytic_outage(Scheme::Proposed, &inp, &laws).unwrap();
    let sr = scheme_sum_rate(Scheme::Proposed, &p, &s.rates);
    assert!((sr - 1.9).abs() < 1e-3, "{sr}");
}

fn in_unit(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn closed_form_outages_are_probabilities(
        alpha_c in 0.001f64..0.499,
        rho_s in 1e-4f64..1e8,
        ratio in 0.01f64..10.0,
        r_xc in 0.01f64..5.0,
        r_xe in 0.01f64..5.0,
        r_xbarc in 0.01f64..5.0,
        w in proptest::array::uniform4(1e-3f64..1e3),
    ) {
        let inp = OutageInputs {
            alloc: PowerAllocation::new(alpha_c, 1.0 - alpha_c).unwrap(),
            rho_s,
            rho_r: ratio * rho_s,
            nm: 512,
            rates: RateTargets::new(r_xc, r_xe, r_xbarc).unwrap(),
        };
        let p = outage_special(&inp, &LinkOmegas { sc_t1: w[0], sr_t1: w[1], sc_t2: w[2], re_t2: w[3] });
        prop_assert!(in_unit(p.xc) && in_unit(p.xe) && in_unit(p.xbarc), "{p:?}");
        for scheme in Scheme::ALL {
            let sr = scheme_sum_rate(scheme, &p, &inp.rates);
            prop_assert!(sr >= 0.0 && sr <= inp.rates.sum() / 2.0 + 1e-12);
        }
    }

    #[test]
    fn closed_form_outages_fall_with_snr(
        snr_db in -10.0f64..50.0,
        step in 0.0f64..20.0,
        r_xc in 0.1f64..3.0,
        r_xe in 0.1f64..1.5,
    ) {
        let omegas = LinkOmegas { sc_t1: 1.0, sr_t1: 0.5, sc_t2: 1.0, re_t2: 1.0 };
        let at = |db: f64| {
            let inp = OutageInputs::from_scenario(&common::special(db, (r_xc, r_xe, 1.0), Scheme::Proposed));
            outage_special(&inp, &omegas)
        };
        let (lo, hi) = (at(snr_db), at(snr_db + step));
        prop_assert!(hi.xc <= lo.xc && hi.xe <= lo.xe && hi.xbarc <= lo.xbarc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn inverted_outages_are_probabilities(
        mults in proptest::collection::vec(1usize..40, 1..6),
        omega in 0.05f64..2.0,
        alpha_c in 0.01f64..0.3,
        rho_s in 1e-2f64..30.0,
    ) {
        let nm = mults.iter().sum();
        let inp = OutageInputs {
            alloc: PowerAllocation::new(alpha_c, 1.0 - alpha_c).unwrap(),
            rho_s,
            rho_r: 0.5 * rho_s,
            nm,
            rates: RateTargets::new(1.0, 0.5, 1.0).unwrap(),
        };
        let cf = CfSpec::new(mults, omega).unwrap();
        for p in [
            outage_xc_general(&inp, &cf).unwrap(),
            outage_xe_general(&inp, &cf, &cf).unwrap(),
            outage_xbarc_general(&inp, &cf).unwrap(),
        ] {
            prop_assert!(in_unit(p), "{p}");
        }
    }
}
