use crate::model::{eigensystem, Band, CurvatureModel, ShimPoint};
use crate::{Error, Result};

const LEVEL_TOL: f64 = 1e-6;
const RADIUS_MIN: f64 = 1e-3;
const RADIUS_MAX: f64 = 5.0;
const SCAN_POINTS: usize = 400;

/// Start point and halfway turn point on the diagonal s_A = s_B.
///
/// Both share the band-2 curvature.
pub fn special_points(alpha: f64) -> Result<(ShimPoint, ShimPoint)> {
    if !alpha.is_finite() || (alpha - 1.0).abs() < 1e-12 || (alpha + 1.0).abs() < 1e-12 {
        return Err(Error::SingularParameter(alpha));
    }
    let s2 = std::f64::consts::SQRT_2;
    let s0 = 1.0 / (alpha - 1.0);
    let s1 = (s2 - 1.0 - (s2 - 3.0) * alpha) / (alpha * alpha - 1.0);
    Ok((ShimPoint::new(s0, s0), ShimPoint::new(s1, s1)))
}

/// Radius along the ray at `phi` where `band` first reaches `level`.
fn ray_root(model: &CurvatureModel, band: Band, level: f64, phi: f64) -> Result<f64> {
    let (sin, cos) = phi.sin_cos();
    let f = |r: f64| eigensystem(model, ShimPoint::new(r * cos, r * sin)).delta_k_values[band.index()] - level;

    // The band is not monotone along rays, so take the first sign change of a
    // coarse scan and bisect inside it.
    let step = (RADIUS_MAX - RADIUS_MIN) / SCAN_POINTS as f64;
    let mut lo = RADIUS_MIN;
    let mut f_lo = f(lo);
    let mut bracket = None;
    for i in 1..=SCAN_POINTS {
        let hi = RADIUS_MIN + step * i as f64;
        let f_hi = f(hi);
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_lo * f_hi <= 0.0 {
            bracket = Some((lo, hi, f_lo));
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    let (mut lo, mut hi, mut f_lo) = bracket.ok_or_else(|| {
        Error::NoContour(format!(
            "band {band} never reaches level {level} at polar angle {:.4} rad within r in [{RADIUS_MIN}, {RADIUS_MAX}]",
            phi
        ))
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_lo * f_mid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `n` points on the level set δk_band = `level`, swept counter-clockwise in
/// polar angle from `from` to `to`.
pub fn constant_curvature_contour(
    model: &CurvatureModel,
    band: Band,
    level: f64,
    from: ShimPoint,
    to: ShimPoint,
    n: usize,
) -> Result<Vec<ShimPoint>> {
    if band == Band::One {
        return Err(Error::InvalidInput("contours are defined for bands 2 and 3".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("contour needs at least 2 points, got {n}")));
    }
    for (name, p) in [("from", from), ("to", to)] {
        if p.norm() < RADIUS_MIN {
            return Err(Error::ContourGeometry(format!("{name} point sits on the conical intersection")));
        }
        let off = eigensystem(model, p).delta_k_values[band.index()] - level;
        if off.abs() > LEVEL_TOL {
            return Err(Error::ContourGeometry(format!(
                "{name} point ({}, {}) is {off:e} off the band-{band} level {level}",
                p.s_a, p.s_b
            )));
        }
    }
    let phi0 = from.angle();
    let mut phi1 = to.angle();
    while phi1 <= phi0 {
        phi1 += std::f64::consts::TAU;
    }

    let mut pts = Vec::with_capacity(n);
    pts.push(from);
    for i in 1..n - 1 {
        let phi = phi0 + (phi1 - phi0) * i as f64 / (n - 1) as f64;
        let r = ray_root(model, band, level, phi)?;
        pts.push(ShimPoint::new(r * phi.cos(), r * phi.sin()));
    }
    pts.push(to);
    Ok(pts)
}
