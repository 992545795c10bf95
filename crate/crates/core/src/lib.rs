//! Pixel-level étendue, optical mode counting and the quantum-limited
//! signal-to-noise ratio of a detector pixel.
//!
//! The analytic chain runs
//! [`etendue`] → [`sensor::effective_coherence_scale`] → [`photon::mode_count`]
//! → [`photon::bose_einstein_occupancy`] → photon number → shot-noise SNR.
//! [`quadrature`] evaluates the defining étendue integral numerically and
//! [`mc`] samples photon counts to check the shot-noise model.

pub mod config;
pub mod constants;
pub mod error;
pub mod etendue;
pub mod mc;
pub mod photon;
pub mod quadrature;
pub mod quantities;
pub mod report;
pub mod sensor;

pub use error::{Error, Result};
