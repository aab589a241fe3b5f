use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::phase::winding_number;
use crate::dynamics::ShimSchedule;
use crate::model::{eigensystem, CurvatureModel, ShimPoint};
use crate::{Error, Result};

/// Waypoints closer than this to the conical intersection are rejected.
pub const MIN_ORIGIN_DISTANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathFamily {
    Canonical,
    Larger,
    Smaller,
    Wavy,
    MultiLoop,
    Custom,
}

impl PathFamily {
    pub const GENERATED: [PathFamily; 5] =
        [PathFamily::Canonical, PathFamily::Larger, PathFamily::Smaller, PathFamily::Wavy, PathFamily::MultiLoop];

    pub fn name(self) -> &'static str {
        match self {
            PathFamily::Canonical => "canonical",
            PathFamily::Larger => "larger",
            PathFamily::Smaller => "smaller",
            PathFamily::Wavy => "wavy",
            PathFamily::MultiLoop => "multi_loop",
            PathFamily::Custom => "custom",
        }
    }
}

impl std::str::FromStr for PathFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::GENERATED
            .into_iter()
            .chain([PathFamily::Custom])
            .find(|f| f.name() == norm || (norm == "multiloop" && *f == PathFamily::MultiLoop))
            .ok_or_else(|| Error::InvalidInput(format!("unknown path family '{s}'")))
    }
}

/// How traversal time is distributed along the waypoint polygon.
///
/// Both profiles ramp the speed up and down with raised-cosine edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedProfile {
    /// Constant speed in (s_A, s_B) arc length.
    ArcLength,
    /// Time per segment proportional to its length times the local
    /// non-adiabatic coupling Σ_{m≠2} |⟨m|∂H|2⟩| / (δk_2 − δk_m)², so the
    /// path slows down where the band-2 gaps close.
    #[default]
    LocallyAdiabatic,
}

/// A closed, timed shim-space loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ShimPath {
    waypoints: Vec<ShimPoint>,
    duration: f64,
    family: PathFamily,
    winding: i32,
    profile: SpeedProfile,
    ramp_fraction: f64,
    /// Cumulative segment weight, normalized to end at 1.
    progress: Vec<f64>,
}

impl ShimPath {
    pub fn new(
        model: &CurvatureModel,
        waypoints: Vec<ShimPoint>,
        duration: f64,
        family: PathFamily,
        profile: SpeedProfile,
        ramp_fraction: f64,
    ) -> Result<Self> {
        if waypoints.len() < 3 {
            return Err(Error::InvalidPath(format!("need at least 3 waypoints, got {}", waypoints.len())));
        }
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::InvalidPath(format!("duration must be non-negative, got {duration}")));
        }
        if !(0.0..0.5).contains(&ramp_fraction) {
            return Err(Error::InvalidPath(format!("ramp fraction must lie in [0, 0.5), got {ramp_fraction}")));
        }
        for p in &waypoints {
            if !p.s_a.is_finite() || !p.s_b.is_finite() {
                return Err(Error::InvalidPath("non-finite waypoint".into()));
            }
            if p.norm() < MIN_ORIGIN_DISTANCE {
                return Err(Error::DegeneratePath(p.s_a, p.s_b));
            }
        }
        let winding = winding_number(&waypoints)?;

        let weights: Vec<f64> = waypoints
            .windows(2)
            .map(|w| {
                let len = (w[1].s_a - w[0].s_a).hypot(w[1].s_b - w[0].s_b);
                match profile {
                    SpeedProfile::ArcLength => len,
                    SpeedProfile::LocallyAdiabatic => len * coupling_weight(model, w[0], w[1]),
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidPath("path has zero length".into()));
        }
        // Keep the progress strictly increasing over non-empty segments.
        let floor = 1e-9 * total / weights.len() as f64;
        let mut progress = Vec::with_capacity(waypoints.len());
        let mut acc = 0.0;
        progress.push(0.0);
        for w in &weights {
            acc += if *w > 0.0 { w.max(floor) } else { 0.0 };
            progress.push(acc);
        }
        progress.iter_mut().for_each(|p| *p /= acc);

        Ok(Self { waypoints, duration, family, winding, profile, ramp_fraction, progress })
    }

    pub fn waypoints(&self) -> &[ShimPoint] {
        &self.waypoints
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn family(&self) -> PathFamily {
        self.family
    }

    pub fn winding(&self) -> i32 {
        self.winding
    }

    pub fn profile(&self) -> SpeedProfile {
        self.profile
    }

    pub fn start(&self) -> ShimPoint {
        self.waypoints[0]
    }

    /// Same geometry, new traversal time.
    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::InvalidPath(format!("duration must be non-negative, got {duration}")));
        }
        Ok(Self { duration, ..self.clone() })
    }

    /// Position after a fraction `tau` ∈ [0, 1] of the traversal time.
    pub fn position(&self, tau: f64) -> ShimPoint {
        let p = ramped_progress(tau.clamp(0.0, 1.0), self.ramp_fraction);
        let i = self.progress.partition_point(|&x| x <= p).clamp(1, self.progress.len() - 1) - 1;
        let span = self.progress[i + 1] - self.progress[i];
        let u = if span > 0.0 { ((p - self.progress[i]) / span).clamp(0.0, 1.0) } else { 0.0 };
        self.waypoints[i].lerp(self.waypoints[i + 1], u)
    }

    /// Fraction of the traversal time at which waypoint `i` is reached.
    fn waypoint_tau(&self, i: usize) -> f64 {
        let target = self.progress[i];
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if ramped_progress(mid, self.ramp_fraction) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Piecewise-linear schedule sampled on a uniform time grid of at least
    /// `min_samples` intervals, with every waypoint included as a knot.
    pub fn schedule(&self, min_samples: usize) -> Result<ShimSchedule> {
        if !(self.duration > 0.0) {
            return Err(Error::InvalidSchedule("path duration is zero".into()));
        }
        let m = min_samples.max(20 * self.waypoints.len()).max(2);
        let mut taus: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        taus.extend((1..self.waypoints.len() - 1).map(|i| self.waypoint_tau(i)));
        taus.sort_by(f64::total_cmp);
        taus.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let mut samples = Vec::with_capacity(taus.len());
        for &tau in &taus {
            samples.push((tau * self.duration, self.position(tau)));
        }
        // exact closure
        let last = samples.len() - 1;
        samples[0].1 = self.waypoints[0];
        samples[last] = (self.duration, *self.waypoints.last().unwrap());
        ShimSchedule::new(samples)
    }

    /// Default schedule resolution.
    pub fn default_schedule(&self) -> Result<ShimSchedule> {
        self.schedule(4000)
    }
}

/// Normalized distance covered after time fraction `tau` with raised-cosine
/// speed ramps over the first and last `r` of the traversal.
fn ramped_progress(tau: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return tau;
    }
    let ramp_area = |x: f64| 0.5 * (x - r / PI * (PI * x / r).sin());
    let total = 1.0 - r;
    let d = if tau < r {
        ramp_area(tau)
    } else if tau <= 1.0 - r {
        0.5 * r + (tau - r)
    } else {
        total - ramp_area(1.0 - tau)
    };
    (d / total).clamp(0.0, 1.0)
}

/// Σ_{m≠2} |⟨m|∂_u H|2⟩| / (δk_2 − δk_m)² at the segment midpoint, with ∂_u the
/// derivative along the segment direction.
fn coupling_weight(model: &CurvatureModel, a: ShimPoint, b: ShimPoint) -> f64 {
    let (da, db) = (b.s_a - a.s_a, b.s_b - a.s_b);
    let len = da.hypot(db);
    if len == 0.0 {
        return 0.0;
    }
    let dir = ShimPoint::new(da / len, db / len);
    let dh = dir.shim_diagonal(model.alpha);
    let ms = eigensystem(model, a.lerp(b, 0.5));
    let v2 = ms.eigenvectors[1];
    [0usize, 2]
        .iter()
        .map(|&m| {
            let vm = ms.eigenvectors[m];
            let elem: f64 = (0..3).map(|i| vm[i] * dh[i] * v2[i]).sum();
            let gap = ms.delta_k_values[1] - ms.delta_k_values[m];
            elem.abs() / (gap * gap).max(1e-300)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<ShimPoint> {
        vec![
            ShimPoint::new(1.0, 0.0),
            ShimPoint::new(0.0, 1.0),
            ShimPoint::new(-1.0, 0.0),
            ShimPoint::new(0.0, -1.0),
            ShimPoint::new(1.0, 0.0),
        ]
    }

    #[test]
    fn progress_profile_shape() {
        assert_eq!(ramped_progress(0.0, 0.05), 0.0);
        assert!((ramped_progress(1.0, 0.05) - 1.0).abs() < 1e-15);
        assert!((ramped_progress(0.5, 0.05) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 1..=1000 {
            let p = ramped_progress(k as f64 / 1000.0, 0.05);
            assert!(p > prev);
            prev = p;
        }
        // zero speed at both ends
        let h = 1e-6;
        assert!(ramped_progress(h, 0.05) / h < 1e-3);
    }

    #[test]
    fn arc_length_schedule_is_uniform_without_ramps() {
        let m = CurvatureModel::fitted();
        let p = ShimPath::new(&m, square(), 1.0, PathFamily::Custom, SpeedProfile::ArcLength, 0.0).unwrap();
        assert_eq!(p.winding(), 1);
        let s = p.schedule(400).unwrap();
        assert_eq!(s.at(0.25), ShimPoint::new(0.0, 1.0));
        let mid = s.at(0.125);
        assert!((mid.s_a - 0.5).abs() < 1e-12 && (mid.s_b - 0.5).abs() < 1e-12);
        assert!(s.is_closed(0.0));
    }

    #[test]
    fn waypoints_are_schedule_knots() {
        let m = CurvatureModel::fitted();
        let p = ShimPath::new(&m, square(), 0.3, PathFamily::Custom, SpeedProfile::LocallyAdiabatic, 0.05).unwrap();
        let s = p.schedule(100).unwrap();
        for w in &square()[1..4] {
            assert!(s.points().iter().any(|q| (q.s_a - w.s_a).abs() < 1e-9 && (q.s_b - w.s_b).abs() < 1e-9));
        }
    }

    #[test]
    fn rejects_bad_paths() {
        let m = CurvatureModel::fitted();
        let mut open = square();
        open.pop();
        assert!(matches!(
            ShimPath::new(&m, open, 1.0, PathFamily::Custom, SpeedProfile::ArcLength, 0.05),
            Err(Error::InvalidPath(_))
        ));
        let mut near = square();
        near[2] = ShimPoint::new(1e-4, 0.0);
        assert!(matches!(
            ShimPath::new(&m, near, 1.0, PathFamily::Custom, SpeedProfile::ArcLength, 0.05),
            Err(Error::DegeneratePath(..))
        ));
    }

    #[test]
    fn family_names_parse() {
        for f in PathFamily::GENERATED {
            assert_eq!(f.name().parse::<PathFamily>().unwrap(), f);
        }
        assert_eq!("multi-loop".parse::<PathFamily>().unwrap(), PathFamily::MultiLoop);
        assert!("spiral".parse::<PathFamily>().is_err());
    }
}
