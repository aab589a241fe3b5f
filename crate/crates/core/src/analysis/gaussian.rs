use nalgebra::{DMatrix, DVector};

use super::{levenberg_marquardt, FitResult, LmOptions, Residuals};
use crate::{Error, Result};

/// offset + amplitude·exp(−(x − center)² / (2·width²))
pub fn gaussian(x: f64, center: f64, width: f64, amplitude: f64, offset: f64) -> f64 {
    offset + amplitude * (-0.5 * ((x - center) / width).powi(2)).exp()
}

struct Peak<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

// p = [amplitude, center, width, offset]
impl Residuals for Peak<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.x.len(), self.x.iter().zip(self.y).map(|(&x, &y)| gaussian(x, p[1], p[2], p[0], p[3]) - y))
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let (a, c, w) = (p[0], p[1], p[2]);
        let mut j = DMatrix::zeros(self.x.len(), 4);
        for (i, &x) in self.x.iter().enumerate() {
            let u = (x - c) / w;
            let e = (-0.5 * u * u).exp();
            j[(i, 0)] = e;
            j[(i, 1)] = a * e * u / w;
            j[(i, 2)] = a * e * u * u / w;
            j[(i, 3)] = 1.0;
        }
        j
    }
}

/// Nonlinear least-squares Gaussian fit to (x, y) points.
///
/// Returns `center`, `width` (σ), `amplitude` and `offset`. A solution whose
/// center leaves the data span is reported as not converged.
pub fn fit_gaussian_peak(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 5 {
        return Err(Error::InvalidInput(format!("Gaussian fit needs at least 5 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("non-finite point in peak window".into()));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (xmin, xmax) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(xmax > xmin) {
        return Err(Error::InvalidInput("peak window has zero width".into()));
    }

    let (imax, &ymax) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    // second moment of the baseline-subtracted window
    let wsum: f64 = y.iter().map(|v| v - ymin).sum();
    let width0 = if wsum > 0.0 {
        let mean = x.iter().zip(&y).map(|(x, v)| x * (v - ymin)).sum::<f64>() / wsum;
        let var = x.iter().zip(&y).map(|(x, v)| (x - mean).powi(2) * (v - ymin)).sum::<f64>() / wsum;
        var.sqrt().clamp((xmax - xmin) / 20.0, xmax - xmin)
    } else {
        (xmax - xmin) / 4.0
    };
    let p0 = DVector::from_vec(vec![ymax - ymin, x[imax], width0, ymin]);
    let out = levenberg_marquardt(&Peak { x: &x, y: &y }, p0, LmOptions::default());

    let p = &out.params;
    let sd = |i: usize| out.covariance[(i, i)].max(0.0).sqrt();
    let mut fit = FitResult { residual: out.rss.sqrt(), converged: out.converged, iterations: out.iterations, ..Default::default() };
    fit.insert("amplitude", p[0], sd(0));
    fit.insert("center", p[1], sd(1));
    fit.insert("width", p[2].abs(), sd(2));
    fit.insert("offset", p[3], sd(3));
    if !(xmin..=xmax).contains(&p[1]) {
        fit.converged = false;
        fit.warnings.push(format!("center {} left the data span [{xmin}, {xmax}]", p[1]));
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(c: f64, w: f64, a: f64, o: f64) -> Vec<(f64, f64)> {
        (0..12).map(|i| -2.0 + 4.0 * i as f64 / 11.0).map(|x| (x, gaussian(x, c, w, a, o))).collect()
    }

    #[test]
    fn noiseless_recovery() {
        let fit = fit_gaussian_peak(&window(0.31, 0.5, 0.9, 0.05)).unwrap();
        assert!(fit.converged);
        for (k, v) in [("center", 0.31), ("width", 0.5), ("amplitude", 0.9), ("offset", 0.05)] {
            assert!((fit.value(k) - v).abs() < 1e-6, "{k}");
        }
    }

    #[test]
    fn merged_peaks_give_middle_center() {
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|i| -2.0 + 4.0 * i as f64 / 11.0)
            .map(|x| (x, gaussian(x, -0.2, 0.6, 1.0, 0.0) + gaussian(x, 0.2, 0.6, 1.0, 0.0)))
            .collect();
        let fit = fit_gaussian_peak(&pts).unwrap();
        assert!(fit.converged);
        assert!(fit.value("center").abs() < 0.05);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_gaussian_peak(&window(0.0, 0.5, 1.0, 0.0)[..4]).is_err());
    }
}
