use std::f64::consts::PI;

use super::{defaults, FrequencyModel, TrapGeometry};
use crate::constants::PhysicalConstants;
use crate::{Error, Result};

/// The five quantities that fix the Hessian family, plus the ion mass needed to
/// turn curvatures into frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureModel {
    /// Common site curvature, N/m.
    pub k_offs: f64,
    /// Coulomb coupling curvature, N/m.
    pub delta_k: f64,
    /// Cross-talk of a site shim onto the other two sites.
    pub alpha: f64,
    /// Shim per applied millivolt, 1/mV.
    pub shim_gain: f64,
    /// Reference frequency (1/2π)·sqrt(k_offs/m), kHz.
    pub f_r: f64,
    /// Ion mass, kg.
    pub ion_mass: f64,
}

impl CurvatureModel {
    /// Build from curvatures; `f_r` is derived from `k_offs`.
    pub fn new(k_offs: f64, delta_k: f64, alpha: f64, shim_gain: f64, ion_mass: f64) -> Result<Self> {
        if !(k_offs > 0.0) || !k_offs.is_finite() {
            return Err(Error::UnstableConfiguration(k_offs));
        }
        if !(delta_k >= 0.0) || !delta_k.is_finite() {
            return Err(Error::InvalidInput(format!("delta_k = {delta_k} must be non-negative")));
        }
        if !(alpha.is_finite() && shim_gain.is_finite() && ion_mass > 0.0) {
            return Err(Error::InvalidInput("alpha, shim gain and ion mass must be finite".into()));
        }
        let f_r = (k_offs / ion_mass).sqrt() / (2.0 * PI) * 1e-3;
        Ok(Self { k_offs, delta_k, alpha, shim_gain, f_r, ion_mass })
    }

    /// Convert a fitted frequency model back to curvatures with the linearised map.
    pub fn from_frequency_model(fm: &FrequencyModel, consts: &PhysicalConstants) -> Result<Self> {
        let m = consts.ion_mass;
        let omega_r = 2.0 * PI * fm.f_r * 1e3;
        let k_offs = m * omega_r * omega_r;
        let delta_k = fm.delta_f * 1e3 * 2.0 * PI * 2.0 * m * omega_r;
        Self::new(k_offs, delta_k, fm.alpha, fm.c, m)
    }

    /// Model with the fitted spectrum parameters and ⁹Be⁺.
    pub fn fitted() -> Self {
        Self::from_frequency_model(&FrequencyModel::fitted(), &PhysicalConstants::beryllium9())
            .expect("fitted parameters are valid")
    }

    pub fn omega_r(&self) -> f64 {
        (self.k_offs / self.ion_mass).sqrt()
    }

    /// Coupling frequency Δk/(2mω_R)/(2π), kHz.
    pub fn delta_f(&self) -> f64 {
        self.delta_k / (2.0 * self.ion_mass * self.omega_r()) / (2.0 * PI) * 1e-3
    }

    pub fn frequency_model(&self) -> FrequencyModel {
        FrequencyModel {
            f_r: self.f_r,
            delta_f: self.delta_f(),
            c: self.shim_gain,
            alpha: self.alpha,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_shim_gain(mut self, c: f64) -> Self {
        self.shim_gain = c;
        self
    }
}

fn offset_geometry_factor(theta: f64) -> f64 {
    (9.0 - 15.0 * (2.0 * theta).cos()) / 8.0
}

fn coupling_geometry_factor(theta: f64) -> f64 {
    (11.0 + 3.0 * (2.0 * theta).cos()) / 8.0
}

/// Coulomb offset and coupling curvatures for bare well curvature `k0`.
///
/// `alpha` and the shim gain are not geometric; they default to the fitted values
/// and can be replaced with [`CurvatureModel::with_alpha`] / [`CurvatureModel::with_shim_gain`].
pub fn coulomb_curvatures(geom: &TrapGeometry, consts: &PhysicalConstants, k0: f64) -> Result<CurvatureModel> {
    let kc = consts.coulomb_constant() / geom.d0.powi(3);
    let k_offs = k0 - kc * offset_geometry_factor(geom.theta);
    let delta_k = kc * coupling_geometry_factor(geom.theta);
    if !(k_offs > 0.0) {
        return Err(Error::UnstableConfiguration(k_offs));
    }
    CurvatureModel::new(k_offs, delta_k, defaults::ALPHA, defaults::SHIM_GAIN_PER_MV, consts.ion_mass)
}

/// Bare well curvature that puts the common radial frequency at `f_r` (kHz).
pub fn k0_for_frequency(geom: &TrapGeometry, consts: &PhysicalConstants, f_r: f64) -> f64 {
    let omega = 2.0 * PI * f_r * 1e3;
    consts.ion_mass * omega * omega
        + consts.coulomb_constant() / geom.d0.powi(3) * offset_geometry_factor(geom.theta)
}

/// Potential energy of three ions displaced along their radial axes, J.
pub fn potential_energy(
    geom: &TrapGeometry,
    consts: &PhysicalConstants,
    k0: f64,
    displacements: [f64; 3],
) -> Result<f64> {
    let limit = geom.d0 / 10.0;
    if let Some(&d) = displacements.iter().find(|d| !(d.abs() < limit)) {
        return Err(Error::DisplacementTooLarge { displacement: d, limit });
    }
    let p: Vec<_> = (0..3)
        .map(|i| geom.site_positions[i] + geom.radial_axes[i] * displacements[i])
        .collect();
    let mut coulomb = 0.0;
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let d = (p[i] - p[j]).norm();
        if d < geom.d0 / 100.0 {
            return Err(Error::NearCollision(d));
        }
        coulomb += 1.0 / d;
    }
    let elastic: f64 = displacements.iter().map(|d| d * d).sum::<f64>() * 0.5 * k0;
    Ok(elastic + consts.coulomb_constant() * coulomb)
}

/// Linearised frequency shift δk/(2mω_R)/(2π) in kHz.
pub fn curvature_to_frequency(model: &CurvatureModel, delta_k: f64) -> Result<f64> {
    let total = model.k_offs + delta_k;
    if !(total > 0.0) {
        return Err(Error::UnstableMode(total));
    }
    Ok(delta_k / (2.0 * model.ion_mass * model.omega_r()) / (2.0 * PI) * 1e-3)
}

/// Exact shift (1/2π)(sqrt((k_offs+δk)/m) − ω_R) in kHz.
pub fn exact_frequency_shift(model: &CurvatureModel, delta_k: f64) -> Result<f64> {
    let total = model.k_offs + delta_k;
    if !(total > 0.0) {
        return Err(Error::UnstableMode(total));
    }
    Ok(((total / model.ion_mass).sqrt() - model.omega_r()) / (2.0 * PI) * 1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_geometry;

    fn reference_geometry() -> TrapGeometry {
        make_geometry(30e-6, 19f64.to_radians()).unwrap()
    }

    #[test]
    fn coupling_curvature_and_frequency() {
        let consts = PhysicalConstants::beryllium9();
        let g = reference_geometry();
        let k0 = k0_for_frequency(&g, &consts, defaults::F_R_KHZ);
        let m = coulomb_curvatures(&g, &consts, k0).unwrap();
        assert!((m.delta_k - 1.4274e-14).abs() < 1e-17, "{}", m.delta_k);
        assert!((m.f_r - defaults::F_R_KHZ).abs() < 1e-9 * defaults::F_R_KHZ);
        let df = m.delta_f();
        assert!((df - defaults::DELTA_F_KHZ).abs() < 0.1 * defaults::DELTA_F_KHZ, "{df}");
    }

    #[test]
    fn coupling_scales_with_inverse_cube() {
        let consts = PhysicalConstants::beryllium9();
        let th = 0.3;
        let a = coulomb_curvatures(&make_geometry(30e-6, th).unwrap(), &consts, 1e-11).unwrap();
        let b = coulomb_curvatures(&make_geometry(60e-6, th).unwrap(), &consts, 1e-11).unwrap();
        assert!((b.delta_k / a.delta_k - 0.125).abs() < 1e-14);
    }

    #[test]
    fn uncharged_ions_do_not_couple() {
        let consts = PhysicalConstants { elementary_charge: 0.0, ..PhysicalConstants::beryllium9() };
        let m = coulomb_curvatures(&reference_geometry(), &consts, 2e-12).unwrap();
        assert_eq!(m.delta_k, 0.0);
        assert_eq!(m.k_offs, 2e-12);
    }

    #[test]
    fn unstable_when_offset_not_positive() {
        let consts = PhysicalConstants::beryllium9();
        let err = coulomb_curvatures(&make_geometry(30e-6, 1.0).unwrap(), &consts, 0.0).unwrap_err();
        assert!(matches!(err, Error::UnstableConfiguration(_)));
    }

    #[test]
    fn resting_energy_is_pair_sum() {
        let consts = PhysicalConstants::beryllium9();
        let g = reference_geometry();
        let v = potential_energy(&g, &consts, 1e-11, [0.0; 3]).unwrap();
        let expected = 3.0 * consts.coulomb_constant() / g.d0;
        assert!((v - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn energy_is_cyclic() {
        let consts = PhysicalConstants::beryllium9();
        let g = reference_geometry();
        let k0 = 9e-12;
        let d = [1.1e-8, -0.4e-8, 2.3e-8];
        let v = potential_energy(&g, &consts, k0, d).unwrap();
        let v1 = potential_energy(&g, &consts, k0, [d[2], d[0], d[1]]).unwrap();
        let v2 = potential_energy(&g, &consts, k0, [d[1], d[2], d[0]]).unwrap();
        assert!((v - v1).abs() < 1e-13 * v);
        assert!((v - v2).abs() < 1e-13 * v);
    }

    #[test]
    fn large_displacement_rejected() {
        let consts = PhysicalConstants::beryllium9();
        let g = reference_geometry();
        let err = potential_energy(&g, &consts, 1e-11, [0.0, 4e-6, 0.0]).unwrap_err();
        assert!(matches!(err, Error::DisplacementTooLarge { .. }));
    }

    #[test]
    fn frequency_map() {
        let m = CurvatureModel::fitted();
        assert_eq!(curvature_to_frequency(&m, 0.0).unwrap(), 0.0);
        let f3 = curvature_to_frequency(&m, 3.0 * m.delta_k).unwrap();
        assert!((f3 - 3.0 * defaults::DELTA_F_KHZ).abs() < 1e-9);
        assert!(matches!(curvature_to_frequency(&m, -2.0 * m.k_offs), Err(Error::UnstableMode(_))));
    }

    #[test]
    fn geometric_coupling_gives_three_delta_f() {
        // 3Δf from the geometry lands within 10% of 3 × 3.299 kHz.
        let consts = PhysicalConstants::beryllium9();
        let g = reference_geometry();
        let m = coulomb_curvatures(&g, &consts, k0_for_frequency(&g, &consts, defaults::F_R_KHZ)).unwrap();
        let f = curvature_to_frequency(&m, 3.0 * m.delta_k).unwrap();
        assert!((f - 9.897).abs() < 0.1 * 9.897, "{f}");
    }

    #[test]
    fn linearised_shift_close_to_exact() {
        let m = CurvatureModel::fitted();
        for frac in [-0.01, -0.005, -1e-4, 1e-4, 0.003, 0.0099] {
            let dk = frac * m.k_offs;
            let lin = curvature_to_frequency(&m, dk).unwrap();
            let exact = exact_frequency_shift(&m, dk).unwrap();
            // Taylor remainder: relative error ≈ |δk|/(4 k_offs) < 0.25%·(|δk|/0.01 k_offs)
            let rel = ((lin - exact) / exact).abs();
            assert!(rel < 2.6e-3 * (frac.abs() / 0.01), "{frac}: {rel}");
            // relative to the mode frequency itself the two forms agree far inside 0.1%
            assert!((lin - exact).abs() / (m.f_r + exact) < 1e-3);
        }
    }
}
