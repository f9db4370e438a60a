//! Simulation and analysis of the nonlinear Pancharatnam phase acquired by
//! N identically polarized photons in a polarization Mach–Zehnder
//! interferometer.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; random draws come from explicitly seeded
//! ChaCha streams so every Monte Carlo result is reproducible from a seed.
//!
//! Module map:
//!
//! * [`polarization`]: Jones vectors and matrices, the interferometer setup.
//! * [`geometric`]: relative phase, post-selection statistics, the
//!   Pancharatnam phase, Stokes vectors and spherical-triangle solid angles.
//! * [`nphoton`]: N-photon fringes and two-photon beam-splitter algebra.
//! * [`counting`]: photon-counting noise model and the ratio estimator.
//! * [`snr`]: closed-form signal-to-noise ratios and sweeps.
//! * [`fringe`]: fringe synthesis, sinusoid fitting, phase-shift curves.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod counting;
pub mod error;
pub mod fringe;
pub mod geometric;
mod linalg;
pub mod nphoton;
pub mod phase;
pub mod polarization;
pub mod snr;
pub mod stats;

pub use crate::counting::NoiseModel;
pub use crate::error::{Error, FitFailure, Result};
pub use crate::polarization::{JonesMatrix, PolarizationState, SetupConfig, SetupStates};

/// Overlap magnitude at or below which a phase is reported as undefined.
pub const DEGENERATE_OVERLAP: f64 = 1e-9;
