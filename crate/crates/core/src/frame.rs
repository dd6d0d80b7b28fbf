//! OTFS grid geometry and the delay-Doppler index convention.
//!
//! Every vectorised grid in this crate uses the same layout: the element for
//! Doppler bin `k` and delay bin `l` lives at `l * N + k`. Time-frequency grids
//! follow the same rule with time slot `n` in place of `k` and subcarrier `m`
//! in place of `l`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, FrameBound, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    /// Number of subcarriers (delay bins).
    pub m: usize,
    /// Number of time slots (Doppler bins).
    pub n: usize,
    /// Subcarrier spacing in Hz.
    pub delta_f: f64,
    /// Carrier frequency in Hz. Only used to translate speed into Doppler.
    pub carrier_hz: f64,
}

impl FrameParams {
    pub fn new(m: usize, n: usize, delta_f: f64, carrier_hz: f64) -> Result<Self> {
        let params = Self { m, n, delta_f, carrier_hz };
        params.check()?;
        Ok(params)
    }

    pub fn check(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidFrame(format!(
                "grid must be non-empty, got M={} N={}",
                self.m, self.n
            )));
        }
        if !(self.delta_f.is_finite() && self.delta_f > 0.0) {
            return Err(Error::InvalidFrame(format!(
                "subcarrier spacing must be positive, got {}",
                self.delta_f
            )));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz >= 0.0) {
            return Err(Error::InvalidFrame(format!(
                "carrier must be non-negative, got {}",
                self.carrier_hz
            )));
        }
        Ok(())
    }

    /// Slot duration `T = 1 / delta_f`.
    pub fn slot_duration(&self) -> f64 {
        1.0 / self.delta_f
    }

    /// Number of delay-Doppler bins, `N * M`.
    pub fn size(&self) -> usize {
        self.n * self.m
    }

    pub fn delay_resolution(&self) -> f64 {
        1.0 / (self.m as f64 * self.delta_f)
    }

    pub fn doppler_resolution(&self) -> f64 {
        1.0 / (self.n as f64 * self.slot_duration())
    }
}

/// A frame that has been checked against the channel's delay and Doppler spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedFrame {
    pub params: FrameParams,
    pub delay_resolution: f64,
    pub doppler_resolution: f64,
}

/// Checks `T >= tau_max` and `delta_f >= v_max`.
pub fn validate_frame(params: FrameParams, tau_max: f64, v_max: f64) -> Result<ValidatedFrame> {
    params.check()?;
    if !(tau_max >= 0.0 && v_max >= 0.0) {
        return Err(Error::InvalidFrame(format!(
            "spreads must be non-negative, got tau_max={tau_max} v_max={v_max}"
        )));
    }
    let t = params.slot_duration();
    if t < tau_max {
        return Err(Error::FrameTooSmall { bound: FrameBound::Delay, have: t, need: tau_max });
    }
    if params.delta_f < v_max {
        return Err(Error::FrameTooSmall {
            bound: FrameBound::Doppler,
            have: params.delta_f,
            need: v_max,
        });
    }
    Ok(ValidatedFrame {
        params,
        delay_resolution: params.delay_resolution(),
        doppler_resolution: params.doppler_resolution(),
    })
}

/// Position on the delay-Doppler grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DdIndex {
    /// Doppler bin, `0 <= k < N`.
    pub k: usize,
    /// Delay bin, `0 <= l < M`.
    pub l: usize,
}

pub fn linear_index(idx: DdIndex, params: &FrameParams) -> Result<usize> {
    if idx.k >= params.n || idx.l >= params.m {
        return Err(Error::IndexOutOfRange { k: idx.k, l: idx.l, n: params.n, m: params.m });
    }
    Ok(idx.l * params.n + idx.k)
}

/// Inverse of [`linear_index`].
pub fn dd_index(i: usize, params: &FrameParams) -> Result<DdIndex> {
    if i >= params.size() {
        return Err(Error::IndexOutOfRange {
            k: i % params.n,
            l: i / params.n,
            n: params.n,
            m: params.m,
        });
    }
    Ok(DdIndex { k: i % params.n, l: i / params.n })
}

/// Largest Doppler shift in Hz for a terminal moving at `speed_mps`.
pub fn max_doppler(speed_mps: f64, carrier_hz: f64) -> f64 {
    speed_mps * carrier_hz / SPEED_OF_LIGHT
}
