//! Closed shim-space paths around (or beside) the conical intersection at the
//! origin, their traversal schedules, dynamical phases and a discrete
//! geometric-phase oracle.

mod contour;
mod pair;
mod path;
mod phase;

pub use contour::{constant_curvature_contour, special_points};
pub use pair::{build_path_pair, build_path_pair_with, FamilyParams, PathOptions, PathPair};
pub use path::{PathFamily, ShimPath, SpeedProfile, MIN_ORIGIN_DISTANCE};
pub use phase::{
    discrete_berry_phase, dynamical_phase, dynamical_phase_schedule, winding_number, DiscretePhase,
};
