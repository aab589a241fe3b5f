use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::FringeTrace;
use crate::{Error, Result};

/// Replace each probability by binomial(shots, p)/shots and fill standard errors.
pub fn sample_shots(trace: &FringeTrace, shots: u32, seed: u64) -> Result<FringeTrace> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = trace.clone();
    for (i, &p) in trace.p_bright.iter().enumerate() {
        let p = p.clamp(0.0, 1.0);
        let k = Binomial::new(shots as u64, p).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(&mut rng);
        let est = k as f64 / shots as f64;
        out.p_bright[i] = est;
        out.std_errors[i] = (est * (1.0 - est) / shots as f64).sqrt();
    }
    out.shots_per_point = shots;
    out.metadata.seed = Some(seed);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::TraceMetadata;

    fn ideal() -> FringeTrace {
        let p: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
        FringeTrace::ideal((0..40).map(|i| i as f64 * 0.01).collect(), p, TraceMetadata::default()).unwrap()
    }

    #[test]
    fn extremes_are_exact() {
        let s = sample_shots(&ideal(), 100, 1).unwrap();
        assert_eq!(s.p_bright[0], 0.0);
        assert_eq!(s.p_bright[39], 1.0);
        assert_eq!(s.std_errors[0], 0.0);
        assert_eq!(s.std_errors[39], 0.0);
        assert_eq!(s.shots_per_point, 100);
    }

    #[test]
    fn deterministic() {
        assert_eq!(sample_shots(&ideal(), 50, 3).unwrap(), sample_shots(&ideal(), 50, 3).unwrap());
        assert_ne!(sample_shots(&ideal(), 50, 3).unwrap(), sample_shots(&ideal(), 50, 4).unwrap());
    }

    #[test]
    fn large_shot_count_concentrates() {
        let t = ideal();
        let s = sample_shots(&t, 1_000_000, 8).unwrap();
        let dev = t.p_bright.iter().zip(&s.p_bright).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 0.005);
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(sample_shots(&ideal(), 0, 0).is_err());
    }
}
