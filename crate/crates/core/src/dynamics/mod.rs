//! Single-phonon dynamics in the three-dimensional single-excitation subspace.
//!
//! Phase convention: eigenmode amplitudes advance as e^{+i·2π·δf·t}. The common
//! f_R carrier is dropped (rotating frame), so all dynamics run at kHz scale with
//! times in ms.

mod evolve;
mod propagate;
mod schedule;
mod state;

pub use evolve::{evolve_static, return_probability, two_site_exchange};
pub use propagate::{default_dt, propagate, PropagationResult};
pub use schedule::ShimSchedule;
pub use state::{change_basis, Basis, Site, SinglePhononState, NORM_TOL};

pub type C64 = num_complex::Complex64;
