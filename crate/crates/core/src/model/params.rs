use serde::{Deserialize, Serialize};

use super::{coulomb_curvatures, defaults, k0_for_frequency, make_geometry, CurvatureModel, FrequencyModel, TrapGeometry};
use crate::constants::PhysicalConstants;
use crate::Result;

/// JSON model document. Missing keys take the fitted defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub d0_um: f64,
    pub theta_deg: f64,
    #[serde(rename = "f_R_kHz")]
    pub f_r_khz: f64,
    #[serde(rename = "delta_f_kHz")]
    pub delta_f_khz: f64,
    #[serde(rename = "c_per_mV")]
    pub c_per_mv: f64,
    pub alpha: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            d0_um: defaults::D0_UM,
            theta_deg: defaults::THETA_DEG,
            f_r_khz: defaults::F_R_KHZ,
            delta_f_khz: defaults::DELTA_F_KHZ,
            c_per_mv: defaults::SHIM_GAIN_PER_MV,
            alpha: defaults::ALPHA,
        }
    }
}

impl ModelParams {
    pub fn frequency_model(&self) -> Result<FrequencyModel> {
        FrequencyModel::new(self.f_r_khz, self.delta_f_khz, self.c_per_mv, self.alpha)
    }

    /// Curvatures implied by the fitted frequencies (not by the geometry).
    pub fn curvature_model(&self) -> Result<CurvatureModel> {
        CurvatureModel::from_frequency_model(&self.frequency_model()?, &PhysicalConstants::beryllium9())
    }

    pub fn geometry(&self) -> Result<TrapGeometry> {
        make_geometry(self.d0_um * 1e-6, self.theta_deg.to_radians())
    }

    /// Curvatures predicted from the geometry, with k0 chosen to hit f_R.
    pub fn geometric_curvature_model(&self) -> Result<CurvatureModel> {
        let consts = PhysicalConstants::beryllium9();
        let geom = self.geometry()?;
        let k0 = k0_for_frequency(&geom, &consts, self.f_r_khz);
        Ok(coulomb_curvatures(&geom, &consts, k0)?.with_alpha(self.alpha).with_shim_gain(self.c_per_mv))
    }
}
