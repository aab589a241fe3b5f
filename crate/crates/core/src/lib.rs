//! Simulation and analysis toolkit for three Coulomb-coupled radial oscillators
//! held at the corners of an equilateral ion microtrap array.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: site geometry, Coulomb curvatures, the shim-dependent Hessian,
//!   its gauge-fixed eigensystem and the frequency-domain model used for fits.
//! * [`dynamics`]: single-phonon states, closed-form evolution at fixed shims
//!   and fixed-step propagation along time-dependent shim schedules.
//! * [`paths`]: closed shim paths around (or beside) the conical intersection,
//!   dynamical phases and a discrete geometric-phase oracle.
//! * [`experiment`]: simulated spectra, exchange interferograms, Berry-phase
//!   fringe pairs, adiabaticity sweeps and shot noise.
//! * [`analysis`]: damped least-squares fitters, parameter extraction and
//!   bootstrap confidence intervals.
//! * [`cli`]: configuration loading and command dispatch for the binary.
//!
//! Units: frequencies in kHz, times in ms, curvatures in N/m, shims unitless.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod model;
pub mod paths;

pub use error::{Error, Result};
pub use model::{CurvatureModel, FrequencyModel, ModeSystem, ShimPoint};
