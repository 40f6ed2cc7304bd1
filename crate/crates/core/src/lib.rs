//! Expected-impact models for noise, multiuser interference and
//! intersymbol interference at a passive spherical receiver in a diffusive
//! channel with flow and first-order degradation, plus a particle-based
//! simulation kernel.
//!
//! The crate is `no_std` (it needs `alloc`). Analytic work is done in
//! dimensionless units; [`scaling`] converts to and from physical units.
#![no_std]

extern crate alloc;

pub mod analytic;
pub mod detector;
pub mod error;
pub mod interference;
pub mod quad;
pub mod scaling;
pub mod sim;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
