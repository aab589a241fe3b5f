use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::FitResult;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub ci68: [f64; 2],
    pub ci95: [f64; 2],
}

impl Interval {
    pub fn width68(&self) -> f64 {
        self.ci68[1] - self.ci68[0]
    }

    pub fn width95(&self) -> f64 {
        self.ci95[1] - self.ci95[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapReport {
    pub trials: usize,
    pub converged: usize,
    pub intervals: BTreeMap<String, Interval>,
    pub warnings: Vec<String>,
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap: resample `rows` with replacement, refit, and report
/// 68% and 95% intervals per parameter.
///
/// Trial i draws from its own ChaCha8 stream (seed, i), so results do not
/// depend on thread count or scheduling.
pub fn bootstrap_ci<T, F>(rows: &[T], fitter: F, trials: usize, seed: u64) -> Result<BootstrapReport>
where
    T: Clone + Sync,
    F: Fn(&[T]) -> Result<FitResult> + Sync,
{
    if trials < 100 {
        return Err(Error::InvalidInput(format!("bootstrap needs at least 100 trials, got {trials}")));
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("bootstrap input is empty".into()));
    }
    let fits: Vec<Option<FitResult>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let sample: Vec<T> = (0..rows.len()).map(|_| rows[rng.gen_range(0..rows.len())].clone()).collect();
            fitter(&sample).ok().filter(|f| f.converged)
        })
        .collect();

    let ok: Vec<&FitResult> = fits.iter().flatten().collect();
    let mut warnings = Vec::new();
    let failed = trials - ok.len();
    if failed * 10 > trials {
        warnings.push(format!("degraded intervals: {failed} of {trials} refits did not converge"));
    }
    if ok.is_empty() {
        return Err(Error::FitFailed("no bootstrap refit converged".into()));
    }
    let mut intervals = BTreeMap::new();
    for name in ok[0].parameters.keys() {
        let mut vals: Vec<f64> = ok.iter().filter_map(|f| f.get(name)).filter(|v| v.is_finite()).collect();
        if vals.is_empty() {
            continue;
        }
        vals.sort_by(f64::total_cmp);
        intervals.insert(
            name.clone(),
            Interval {
                ci68: [quantile(&vals, 0.16), quantile(&vals, 0.84)],
                ci95: [quantile(&vals, 0.025), quantile(&vals, 0.975)],
            },
        );
    }
    Ok(BootstrapReport { trials, converged: ok.len(), intervals, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn mean_fit(rows: &[f64]) -> Result<FitResult> {
        let mut f = FitResult { converged: true, ..Default::default() };
        f.insert("mean", rows.iter().sum::<f64>() / rows.len() as f64, 0.0);
        Ok(f)
    }

    fn noisy(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(1.0, 0.5).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn zero_noise_gives_zero_width() {
        let rep = bootstrap_ci(&[2.0; 30], mean_fit, 200, 1).unwrap();
        assert!(rep.intervals["mean"].width95() < 1e-6);
    }

    #[test]
    fn deterministic_per_seed() {
        let rows = noisy(50, 3);
        let a = bootstrap_ci(&rows, mean_fit, 300, 9).unwrap();
        let b = bootstrap_ci(&rows, mean_fit, 300, 9).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_ci(&rows, mean_fit, 300, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn width_scales_inverse_sqrt() {
        let w = |n| bootstrap_ci(&noisy(n, 11), mean_fit, 2000, 5).unwrap().intervals["mean"].width68();
        let ratio = w(32) / w(128);
        assert!((ratio - 2.0).abs() < 0.6, "ratio {ratio}");
    }

    #[test]
    fn failing_fitter_warns() {
        let flaky = |rows: &[f64]| -> Result<FitResult> {
            if rows[0] > 1.0 {
                Err(Error::FitFailed("x".into()))
            } else {
                mean_fit(rows)
            }
        };
        let rep = bootstrap_ci(&noisy(40, 2), flaky, 200, 4).unwrap();
        assert!(!rep.warnings.is_empty());
        assert!(bootstrap_ci(&[1.0], mean_fit, 50, 0).is_err());
    }
}
