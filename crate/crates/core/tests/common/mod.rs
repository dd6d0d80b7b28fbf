#![allow(dead_code)]

use otfs_cdrt::channel::LinkId;
use otfs_cdrt::frame::FrameParams;
use otfs_cdrt::modem::{Constellation, PowerAllocation};
use otfs_cdrt::protocol::{LinkProfiles, RateTargets, Scenario, Scheme};

pub const GENERAL_K: [usize; 3] = [0, 1, 2];
pub const GENERAL_L: [usize; 3] = [0, 2, 3];

pub fn omega(id: LinkId) -> f64 {
    match id {
        LinkId::SrT1 => 0.5,
        _ => 1.0,
    }
}

/// 32x16 frame, relay at half the source power, `alpha = (0.1, 0.9)`.
pub fn scenario(k: &[usize], l: &[usize], snr_db: f64, rates: (f64, f64, f64), scheme: Scheme) -> Scenario {
    let rho_s = 10f64.powf(snr_db / 10.0);
    Scenario {
        frame: FrameParams::new(32, 16, 3750.0, 4e9).unwrap(),
        profiles: LinkProfiles::uniform(k, l, omega).unwrap(),
        alloc: PowerAllocation::new(0.1, 0.9).unwrap(),
        rho_s,
        rho_r: 0.5 * rho_s,
        rates: RateTargets::new(rates.0, rates.1, rates.2).unwrap(),
        scheme,
        xbarc_needs_sic: false,
        constellation: Constellation::Qpsk,
    }
}

pub fn special(snr_db: f64, rates: (f64, f64, f64), scheme: Scheme) -> Scenario {
    scenario(&[1], &[1], snr_db, rates, scheme)
}

pub fn general(snr_db: f64, rates: (f64, f64, f64), scheme: Scheme) -> Scenario {
    scenario(&GENERAL_K, &GENERAL_L, snr_db, rates, scheme)
}
