use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::CurvatureModel;
use crate::{Error, Result};

/// Eigenvalues closer than this (in units of Δk) are treated as one degenerate pair.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Unitless curvature tuning of sites A and B.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShimPoint {
    pub s_a: f64,
    pub s_b: f64,
}

impl ShimPoint {
    pub const ORIGIN: ShimPoint = ShimPoint { s_a: 0.0, s_b: 0.0 };

    pub const fn new(s_a: f64, s_b: f64) -> Self {
        Self { s_a, s_b }
    }

    /// Shims from electrode voltages (mV) through the gain `c` (1/mV).
    pub fn from_millivolts(dv_a: f64, dv_b: f64, c: f64) -> Self {
        Self::new(c * dv_a, c * dv_b)
    }

    /// Reject non-finite shims and those beyond `max_abs` in either coordinate.
    pub fn validated(self, max_abs: f64) -> Result<Self> {
        if !(self.s_a.is_finite() && self.s_b.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite shim ({}, {})", self.s_a, self.s_b)));
        }
        if self.s_a.abs() > max_abs || self.s_b.abs() > max_abs {
            return Err(Error::InvalidInput(format!(
                "shim ({}, {}) outside |s| <= {max_abs}",
                self.s_a, self.s_b
            )));
        }
        Ok(self)
    }

    pub fn swapped(self) -> Self {
        Self::new(self.s_b, self.s_a)
    }

    pub fn norm(self) -> f64 {
        self.s_a.hypot(self.s_b)
    }

    pub fn angle(self) -> f64 {
        self.s_b.atan2(self.s_a)
    }

    pub fn lerp(self, other: Self, u: f64) -> Self {
        Self::new(self.s_a + (other.s_a - self.s_a) * u, self.s_b + (other.s_b - self.s_b) * u)
    }

    /// Diagonal of the unit-free shim matrix S(s_A, s_B).
    pub fn shim_diagonal(self, alpha: f64) -> [f64; 3] {
        [
            self.s_a + alpha * self.s_b,
            self.s_b + alpha * self.s_a,
            alpha * (self.s_a + self.s_b),
        ]
    }
}

/// C + S(s_A, s_B): the Hessian with k_offs removed, in units of Δk.
pub(crate) fn coupling_matrix(alpha: f64, shims: ShimPoint) -> Matrix3<f64> {
    let d = shims.shim_diagonal(alpha);
    let mut m = Matrix3::repeat(1.0);
    for i in 0..3 {
        m[(i, i)] += d[i];
    }
    m
}

/// H = k_offs·I + Δk·(C + S(s_A, s_B)), N/m.
pub fn build_hessian(model: &CurvatureModel, shims: ShimPoint) -> Matrix3<f64> {
    Matrix3::identity() * model.k_offs + coupling_matrix(model.alpha, shims) * model.delta_k
}

/// Which sign/basis convention produced the eigenvectors of a [`ModeSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeTag {
    /// Each vector's largest-magnitude component (first one on ties) is positive.
    LargestComponentPositive,
    /// Lower two bands degenerate; the fixed pair (0,1,-1)/√2, (2,-1,-1)/√6 is used.
    CanonicalDegeneratePair,
}

/// Sorted eigenvalues (units of Δk, relative to k_offs) and orthonormal eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSystem {
    pub delta_k_values: [f64; 3],
    /// `eigenvectors[j]` is the site-basis vector (A, B, C) of band j.
    pub eigenvectors: [[f64; 3]; 3],
    pub gauge_tag: GaugeTag,
}

impl ModeSystem {
    /// Eigensystem of C + S for cross-talk `alpha`.
    pub fn compute(alpha: f64, shims: ShimPoint) -> Self {
        let eig = SymmetricEigen::new(coupling_matrix(alpha, shims));
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let delta_k_values = order.map(|i| eig.eigenvalues[i]);

        let s2 = std::f64::consts::SQRT_2;
        let s6 = 6f64.sqrt();
        let lower_degenerate = (delta_k_values[1] - delta_k_values[0]).abs() < DEGENERACY_TOL;
        if lower_degenerate {
            let top = gauge_fix(eig.eigenvectors.column(order[2]).into_owned());
            return Self {
                delta_k_values,
                eigenvectors: [
                    [0.0, 1.0 / s2, -1.0 / s2],
                    [2.0 / s6, -1.0 / s6, -1.0 / s6],
                    [top.x, top.y, top.z],
                ],
                gauge_tag: GaugeTag::CanonicalDegeneratePair,
            };
        }
        let eigenvectors = order.map(|i| {
            let v = gauge_fix(eig.eigenvectors.column(i).into_owned());
            [v.x, v.y, v.z]
        });
        Self { delta_k_values, eigenvectors, gauge_tag: GaugeTag::LargestComponentPositive }
    }

    pub fn eigenvector(&self, band: usize) -> Vector3<f64> {
        Vector3::from(self.eigenvectors[band])
    }

    /// Columns are the eigenvectors; maps eigen amplitudes to site amplitudes.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.eigenvector(0), self.eigenvector(1), self.eigenvector(2)])
    }

    /// |c_site^(j)|² for the three bands.
    pub fn site_weights(&self, site: usize) -> [f64; 3] {
        [0, 1, 2].map(|j| self.eigenvectors[j][site].powi(2))
    }

    /// Smallest distance from `band` to another band, in units of Δk.
    pub fn gap(&self, band: usize) -> f64 {
        (0..3)
            .filter(|&j| j != band)
            .map(|j| (self.delta_k_values[j] - self.delta_k_values[band]).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

fn gauge_fix(v: Vector3<f64>) -> Vector3<f64> {
    let max = v.amax();
    let lead = v.iter().copied().find(|c| c.abs() >= max * (1.0 - 1e-12)).unwrap_or(1.0);
    let v = v.normalize();
    if lead < 0.0 {
        -v
    } else {
        v
    }
}

/// Gauge-fixed eigensystem of the Hessian at `shims`.
pub fn eigensystem(model: &CurvatureModel, shims: ShimPoint) -> ModeSystem {
    ModeSystem::compute(model.alpha, shims)
}

/// Sorted δk/Δk triples over a grid of shim points.
pub fn eigen_surfaces(model: &CurvatureModel, grid: &[ShimPoint]) -> Result<Vec<[f64; 3]>> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("eigen surface grid is empty".into()));
    }
    Ok(grid.iter().map(|&s| eigensystem(model, s).delta_k_values).collect())
}

/// Square n×n grid over [-range, range]², row-major in s_A then s_B.
pub fn shim_grid(n: usize, range: f64) -> Vec<ShimPoint> {
    let step = |i: usize| {
        if n == 1 {
            0.0
        } else {
            -range + 2.0 * range * i as f64 / (n - 1) as f64
        }
    };
    (0..n)
        .flat_map(|i| (0..n).map(move |j| ShimPoint::new(step(i), step(j))))
        .collect()
}
