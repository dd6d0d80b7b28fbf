//! Link-level simulator and outage analysis for OTFS-NOMA coordinated direct
//! and relay transmission over doubly-selective channels.
//!
//! * [`frame`]: grid geometry and index conventions
//! * [`channel`]: DD channel realizations, eigen-spectra, eigenvalue groups
//! * [`modem`]: ISFFT/SFFT, superposition, DD channel, ZF equalisation
//! * [`protocol`]: SINRs and outage decisions for the proposed scheme and baselines
//! * [`analysis`]: CF of the post-ZF noise term, CDF inversion, closed forms
//! * [`montecarlo`]: reproducible parallel outage estimation

pub mod analysis;
pub mod channel;
pub mod error;
pub mod frame;
pub mod modem;
pub mod montecarlo;
pub mod protocol;

pub use error::{Error, Result};
