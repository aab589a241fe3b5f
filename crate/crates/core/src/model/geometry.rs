use nalgebra::Vector3;

use crate::{Error, Result};

/// Equilateral three-site array centred at the origin, with the tilted radial
/// principal axis of each well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapGeometry {
    /// Side length in m.
    pub d0: f64,
    /// Tilt of the radial axes out of the triangle plane, rad.
    pub theta: f64,
    /// Ion height above the electrodes in m. Has no effect on the radial model.
    pub z0: f64,
    pub site_positions: [Vector3<f64>; 3],
    pub radial_axes: [Vector3<f64>; 3],
}

/// Site coordinates and radial unit vectors for sites A, B, C.
pub fn make_geometry(d0: f64, theta: f64) -> Result<TrapGeometry> {
    if !d0.is_finite() || d0 <= 0.0 {
        return Err(Error::InvalidGeometry(format!("side length d0 = {d0} must be positive")));
    }
    if !theta.is_finite() || !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidGeometry(format!("tilt angle {theta} rad outside [0, pi/2)")));
    }
    let s3 = 3f64.sqrt();
    let site_positions = [
        Vector3::new(-s3, 1.0, 0.0) * (d0 / (2.0 * s3)),
        Vector3::new(0.0, -1.0, 0.0) * (d0 / s3),
        Vector3::new(s3, 1.0, 0.0) * (d0 / (2.0 * s3)),
    ];
    let (sin, cos) = theta.sin_cos();
    let radial_axes = [
        Vector3::new(-s3 * cos, cos, 2.0 * sin) * 0.5,
        Vector3::new(0.0, -cos, sin),
        Vector3::new(s3 * cos, cos, 2.0 * sin) * 0.5,
    ];
    Ok(TrapGeometry {
        d0,
        theta,
        z0: super::defaults::Z0_UM * 1e-6,
        site_positions,
        radial_axes,
    })
}

impl TrapGeometry {
    pub fn with_height(mut self, z0: f64) -> Self {
        self.z0 = z0;
        self
    }
}
