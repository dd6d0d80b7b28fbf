//! Closed-form outage analysis.

pub mod bessel;
pub mod cf;
pub mod inversion;
pub mod outage;

pub use bessel::bessel_k1;
pub use cf::{cf_theta, psi, CfSpec};
pub use inversion::{
    auto_tune_inversion, gil_pelaez_cdf, gil_pelaez_cdf_grid, gil_pelaez_raw, gil_pelaez_raw_grid, tail_aliasing,
    theta_cdf, theta_cdf_grid, InversionParams,
};
pub use outage::*;
