//! Geometry, Coulomb curvatures, the shim-dependent Hessian and its eigenmodes.

mod band;
mod curvature;
mod frequency;
mod geometry;
mod hessian;
mod params;

pub use band::Band;
pub use curvature::{
    coulomb_curvatures, curvature_to_frequency, exact_frequency_shift, k0_for_frequency,
    potential_energy, CurvatureModel,
};
pub use frequency::{mode_frequencies, FrequencyModel};
pub use geometry::{make_geometry, TrapGeometry};
pub use hessian::{
    build_hessian, eigen_surfaces, eigensystem, shim_grid, GaugeTag, ModeSystem, ShimPoint,
    DEGENERACY_TOL,
};
pub use params::ModelParams;

/// Fitted spectrum parameters used as defaults everywhere.
pub mod defaults {
    pub const F_R_KHZ: f64 = 3876.60;
    pub const DELTA_F_KHZ: f64 = 3.299;
    pub const SHIM_GAIN_PER_MV: f64 = -1.202;
    pub const ALPHA: f64 = -0.383;
    pub const D0_UM: f64 = 30.0;
    pub const THETA_DEG: f64 = 19.0;
    pub const Z0_UM: f64 = 40.0;
}
