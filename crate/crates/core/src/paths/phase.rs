use std::f64::consts::{PI, TAU};

use super::ShimPath;
use crate::dynamics::ShimSchedule;
use crate::model::{eigensystem, Band, CurvatureModel, ShimPoint};
use crate::{Error, Result};

/// Gap (units of Δk) below which a band's phase is undefined.
const GAP_TOL: f64 = 1e-6;
const MIN_OVERLAP: f64 = 0.9;
const SNAP_TOL: f64 = 1e-6;

/// Geometric phase of a closed loop, raw and snapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretePhase {
    /// arg of the overlap product, in (−π, π].
    pub raw: f64,
    /// `raw` snapped to 0 or π when within 1e−6, otherwise `raw` wrapped to [0, 2π).
    pub value: f64,
}

/// Signed number of turns of a closed polygon about the origin.
pub fn winding_number(waypoints: &[ShimPoint]) -> Result<i32> {
    let (first, last) = match (waypoints.first(), waypoints.last()) {
        (Some(f), Some(l)) if waypoints.len() >= 2 => (*f, *l),
        _ => return Err(Error::InvalidPath("empty path".into())),
    };
    if (first.s_a - last.s_a).abs() > 1e-12 || (first.s_b - last.s_b).abs() > 1e-12 {
        return Err(Error::InvalidPath(format!(
            "path is open: starts at ({}, {}) and ends at ({}, {})",
            first.s_a, first.s_b, last.s_a, last.s_b
        )));
    }
    if let Some(p) = waypoints.iter().find(|p| p.norm() == 0.0) {
        return Err(Error::DegeneratePath(p.s_a, p.s_b));
    }
    let total: f64 = waypoints
        .windows(2)
        .map(|w| {
            let cross = w[0].s_a * w[1].s_b - w[0].s_b * w[1].s_a;
            let dot = w[0].s_a * w[1].s_a + w[0].s_b * w[1].s_b;
            cross.atan2(dot)
        })
        .sum();
    Ok((total / TAU).round() as i32)
}

/// ∫ 2π·δf_band dt over a schedule (trapezoid on the schedule knots), rad.
pub fn dynamical_phase_schedule(model: &CurvatureModel, schedule: &ShimSchedule, band: Band) -> Result<f64> {
    let df = model.delta_f();
    let freq = |s: ShimPoint| -> Result<f64> {
        let ms = eigensystem(model, s);
        if ms.gap(band.index()) < GAP_TOL {
            return Err(Error::PhaseUndefined { band: band.number() as usize, s_a: s.s_a, s_b: s.s_b });
        }
        Ok(2.0 * PI * df * ms.delta_k_values[band.index()])
    };
    let t = schedule.times();
    let p = schedule.points();
    let mut prev = freq(p[0])?;
    let mut acc = 0.0;
    for i in 1..t.len() {
        let next = freq(p[i])?;
        acc += 0.5 * (t[i] - t[i - 1]) * (prev + next);
        prev = next;
    }
    Ok(acc)
}

/// Dynamical phase of `band` along `path` at its own speed profile, rad.
pub fn dynamical_phase(model: &CurvatureModel, path: &ShimPath, band: Band) -> Result<f64> {
    if path.duration() == 0.0 {
        return Ok(0.0);
    }
    dynamical_phase_schedule(model, &path.default_schedule()?, band)
}

/// Pancharatnam phase from the product of successive real eigenvector overlaps.
pub fn discrete_berry_phase(model: &CurvatureModel, path: &ShimPath, band: Band) -> Result<DiscretePhase> {
    let wp = path.waypoints();
    let mut vecs = Vec::with_capacity(wp.len());
    for p in wp {
        let ms = eigensystem(model, *p);
        if ms.gap(band.index()) < GAP_TOL {
            return Err(Error::PhaseUndefined { band: band.number() as usize, s_a: p.s_a, s_b: p.s_b });
        }
        vecs.push(ms.eigenvectors[band.index()]);
    }
    let mut sign = 1.0f64;
    for i in 0..vecs.len() - 1 {
        let o: f64 = (0..3).map(|k| vecs[i][k] * vecs[i + 1][k]).sum();
        if o.abs() < MIN_OVERLAP {
            return Err(Error::RefinePath { overlap: o.abs(), index: i, next: i + 1 });
        }
        sign *= o.signum();
    }
    // Real overlaps give a real product; its argument is 0 or π.
    let raw = if sign < 0.0 { PI } else { 0.0 };
    let value = if raw.abs() < SNAP_TOL {
        0.0
    } else if (raw - PI).abs() < SNAP_TOL {
        PI
    } else {
        raw.rem_euclid(TAU)
    };
    Ok(DiscretePhase { raw, value })
}
