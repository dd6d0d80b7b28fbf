//! Sweeps, CF validation and plotting on top of the `otfs_cdrt` simulator.

pub mod app;
pub mod config;
pub mod plot;
pub mod sweep;
pub mod validate;
