use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{constant_curvature_contour, special_points, PathFamily, ShimPath, SpeedProfile};
use crate::model::{eigensystem, Band, CurvatureModel, ShimPoint};
use crate::{Error, Result};

/// Shape parameters of the variant families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyParams {
    /// Peak radial scale of the `Larger` family.
    pub larger_scale: f64,
    /// Peak radial scale of the `Smaller` family.
    pub smaller_scale: f64,
    /// Relative radial modulation of the `Wavy` family.
    pub wave_amplitude: f64,
    /// Modulation periods per half loop.
    pub wave_periods: f64,
    /// Repetitions of the `MultiLoop` family.
    pub loops: u32,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self { larger_scale: 1.5, smaller_scale: 0.6, wave_amplitude: 0.1, wave_periods: 5.0, loops: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathOptions {
    pub family_params: FamilyParams,
    pub speed_profile: SpeedProfile,
    /// Fraction of T spent on each raised-cosine speed ramp.
    pub ramp_fraction: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self { family_params: FamilyParams::default(), speed_profile: SpeedProfile::default(), ramp_fraction: 0.05 }
    }
}

/// Loop around the conical intersection and its out-and-back partner.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPair {
    pub enclosing: ShimPath,
    pub non_enclosing: ShimPath,
}

impl PathPair {
    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        Ok(Self {
            enclosing: self.enclosing.with_duration(duration)?,
            non_enclosing: self.non_enclosing.with_duration(duration)?,
        })
    }
}

pub fn build_path_pair(model: &CurvatureModel, family: PathFamily, duration: f64, n: usize) -> Result<PathPair> {
    build_path_pair_with(model, family, duration, n, &PathOptions::default())
}

/// Build a path pair whose half loops have `n` waypoints each.
///
/// The first half follows the band-2 contour from the start point
/// counter-clockwise to the turn point, reshaped radially by the family while
/// keeping both ends fixed. The enclosing loop returns along the s_A ↔ s_B
/// mirror image; the non-enclosing loop retraces the first half.
pub fn build_path_pair_with(
    model: &CurvatureModel,
    family: PathFamily,
    duration: f64,
    n: usize,
    opts: &PathOptions,
) -> Result<PathPair> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidInput(format!("path duration must be positive, got {duration}")));
    }
    if n < 16 {
        return Err(Error::InvalidInput(format!("need at least 16 waypoints per half loop, got {n}")));
    }
    let fp = &opts.family_params;
    let (start, turn) = special_points(model.alpha)?;
    let level = eigensystem(model, start).delta_k_values[Band::Two.index()];
    let contour = constant_curvature_contour(model, Band::Two, level, start, turn, n)?;

    let radial = |u: f64| -> f64 {
        match family {
            PathFamily::Larger => 1.0 + (fp.larger_scale - 1.0) * (PI * u).sin(),
            PathFamily::Smaller => 1.0 + (fp.smaller_scale - 1.0) * (PI * u).sin(),
            PathFamily::Wavy => 1.0 + fp.wave_amplitude * (TAU * fp.wave_periods * u).sin(),
            _ => 1.0,
        }
    };
    let half: Vec<ShimPoint> = contour
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let g = radial(i as f64 / (n - 1) as f64);
            ShimPoint::new(p.s_a * g, p.s_b * g)
        })
        .collect();
    if let Some(p) = half.iter().find(|p| p.norm() < super::MIN_ORIGIN_DISTANCE) {
        return Err(Error::DegeneratePath(p.s_a, p.s_b));
    }
    // keep the diagonal endpoints exact
    let mut half = half;
    half[0] = start;
    half[n - 1] = turn;

    let mut enclosing_loop = half.clone();
    enclosing_loop.extend(half.iter().rev().skip(1).map(|p| p.swapped()));
    let mut out_and_back = half.clone();
    out_and_back.extend(half.iter().rev().skip(1).copied());

    let repeats = match family {
        PathFamily::MultiLoop => {
            if fp.loops == 0 {
                return Err(Error::InvalidInput("loop count must be at least 1".into()));
            }
            fp.loops as usize
        }
        PathFamily::Custom => {
            return Err(Error::InvalidInput("custom paths are built from waypoints, not generated".into()));
        }
        _ => 1,
    };
    let repeat = |lp: &[ShimPoint]| {
        let mut out = lp.to_vec();
        for _ in 1..repeats {
            out.extend_from_slice(&lp[1..]);
        }
        out
    };

    let make = |pts| ShimPath::new(model, pts, duration, family, opts.speed_profile, opts.ramp_fraction);
    Ok(PathPair { enclosing: make(repeat(&enclosing_loop))?, non_enclosing: make(repeat(&out_and_back))? })
}
