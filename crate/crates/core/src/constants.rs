//! CODATA 2018 values used to evaluate the Coulomb curvatures.

use std::f64::consts::PI;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19; // C, exact
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12; // F/m
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27; // kg
pub const BERYLLIUM9_MASS_U: f64 = 9.012_182;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub elementary_charge: f64,
    pub vacuum_permittivity: f64,
    pub ion_mass: f64,
}

impl PhysicalConstants {
    /// Singly charged ⁹Be⁺.
    pub fn beryllium9() -> Self {
        Self {
            elementary_charge: ELEMENTARY_CHARGE,
            vacuum_permittivity: VACUUM_PERMITTIVITY,
            ion_mass: BERYLLIUM9_MASS_U * ATOMIC_MASS_UNIT,
        }
    }

    /// q² / (4π ε₀) in J·m.
    pub fn coulomb_constant(&self) -> f64 {
        self.elementary_charge.powi(2) / (4.0 * PI * self.vacuum_permittivity)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::beryllium9()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beryllium_mass_in_kg() {
        let c = PhysicalConstants::beryllium9();
        assert!((c.ion_mass - 1.496_508_2e-26).abs() < 1e-32);
        assert!(c.elementary_charge > 0.0 && c.vacuum_permittivity > 0.0);
    }
}
