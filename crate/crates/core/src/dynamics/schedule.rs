use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::ShimPoint;
use crate::{Error, Result};

/// Piecewise-linear shim trajectory over [0, T] ms.
#[derive(Debug, Clone, PartialEq)]
pub struct ShimSchedule {
    times: Vec<f64>,
    points: Vec<ShimPoint>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleJson {
    duration_ms: f64,
    points: Vec<[f64; 3]>,
}

impl ShimSchedule {
    pub fn new(samples: Vec<(f64, ShimPoint)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidSchedule("need at least two samples".into()));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::InvalidSchedule(format!("first time is {} ms, expected 0", samples[0].0)));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(Error::InvalidSchedule(format!(
                    "times must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if samples.iter().any(|(_, p)| !p.s_a.is_finite() || !p.s_b.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite shim value".into()));
        }
        let (times, points) = samples.into_iter().unzip();
        Ok(Self { times, points })
    }

    /// Hold `shims` fixed for `duration` ms.
    pub fn constant(shims: ShimPoint, duration: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::InvalidSchedule(format!("duration must be positive, got {duration}")));
        }
        Self::new(vec![(0.0, shims), (duration, shims)])
    }

    /// Samples `points` at uniform spacing over `duration`.
    pub fn uniform(points: &[ShimPoint], duration: f64) -> Result<Self> {
        if points.len() < 2 || !(duration > 0.0) {
            return Err(Error::InvalidSchedule("need two points and a positive duration".into()));
        }
        let n = (points.len() - 1) as f64;
        Self::new(points.iter().enumerate().map(|(i, p)| (duration * i as f64 / n, *p)).collect())
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[ShimPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        let a = self.points[0];
        let b = *self.points.last().unwrap();
        (a.s_a - b.s_a).abs() <= tol && (a.s_b - b.s_b).abs() <= tol
    }

    /// Shims at time `t`, clamped to [0, T].
    pub fn at(&self, t: f64) -> ShimPoint {
        if t <= 0.0 {
            return self.points[0];
        }
        if t >= self.duration() {
            return *self.points.last().unwrap();
        }
        let i = self.times.partition_point(|&x| x <= t) - 1;
        let u = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        self.points[i].lerp(self.points[i + 1], u)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidSchedule(e.to_string()))
    }
}

impl Serialize for ShimSchedule {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ScheduleJson {
            duration_ms: self.duration(),
            points: self.times.iter().zip(&self.points).map(|(t, p)| [*t, p.s_a, p.s_b]).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ShimSchedule {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = ScheduleJson::deserialize(de)?;
        let s = ShimSchedule::new(raw.points.iter().map(|p| (p[0], ShimPoint::new(p[1], p[2]))).collect())
            .map_err(serde::de::Error::custom)?;
        if (s.duration() - raw.duration_ms).abs() > 1e-12 * raw.duration_ms.abs().max(1.0) {
            return Err(serde::de::Error::custom(format!(
                "duration_ms {} does not match last sample time {}",
                raw.duration_ms,
                s.duration()
            )));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_linearly() {
        let s = ShimSchedule::new(vec![
            (0.0, ShimPoint::new(0.0, 0.0)),
            (1.0, ShimPoint::new(1.0, -1.0)),
            (3.0, ShimPoint::new(1.0, 1.0)),
        ])
        .unwrap();
        assert_eq!(s.at(0.5), ShimPoint::new(0.5, -0.5));
        assert_eq!(s.at(2.0), ShimPoint::new(1.0, 0.0));
        assert_eq!(s.at(1.0), ShimPoint::new(1.0, -1.0));
        assert_eq!(s.at(5.0), ShimPoint::new(1.0, 1.0));
        assert!(!s.is_closed(1e-12));
    }

    #[test]
    fn rejects_bad_times() {
        let p = ShimPoint::ORIGIN;
        assert!(ShimSchedule::new(vec![(0.0, p)]).is_err());
        assert!(ShimSchedule::new(vec![(0.1, p), (1.0, p)]).is_err());
        assert!(ShimSchedule::new(vec![(0.0, p), (1.0, p), (1.0, p)]).is_err());
        assert!(ShimSchedule::constant(p, 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = ShimSchedule::uniform(&[ShimPoint::new(-0.7, -0.7), ShimPoint::new(0.2, 0.3), ShimPoint::new(-0.7, -0.7)], 0.78)
            .unwrap();
        let back = ShimSchedule::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        assert!(back.is_closed(0.0));
    }

    #[test]
    fn json_rejects_mismatch() {
        let bad = r#"{"duration_ms": 2.0, "points": [[0, 0, 0], [1, 0, 0]]}"#;
        assert!(ShimSchedule::from_json(bad).is_err());
        let extra = r#"{"duration_ms": 1.0, "points": [[0, 0, 0], [1, 0, 0]], "x": 1}"#;
        assert!(ShimSchedule::from_json(extra).is_err());
    }
}
