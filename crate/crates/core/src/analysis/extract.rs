use nalgebra::{Matrix2, Matrix4, Vector4};

use super::FitResult;
use crate::{Error, Result};

/// Fitted peak centers (kHz, ascending) at one electrode offset δV_A (mV).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakCenters {
    pub dv_a: f64,
    pub centers: [f64; 3],
}

struct Line {
    intercept: f64,
    slope: f64,
    /// covariance of (intercept, slope)
    cov: Matrix2<f64>,
    rss: f64,
}

fn fit_line(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = if x.len() > 2 { rss / (n - 2.0) } else { 0.0 };
    let var_slope = s2 / sxx;
    let cov = Matrix2::new(s2 / n + mx * mx * var_slope, -mx * var_slope, -mx * var_slope, var_slope);
    Line { intercept, slope, cov, rss }
}

/// Index of the linear (decoupled) branch at each δV_A.
///
/// The branch keeps one sorted index on each side of a split point. All
/// (split, left index, right index) candidates are tried; the best straight
/// line must beat every distinct alternative clearly.
fn assign_linear_branch(data: &[PeakCenters]) -> Result<Vec<usize>> {
    let x: Vec<f64> = data.iter().map(|d| d.dv_a).collect();
    let mut candidates: Vec<(f64, Vec<usize>, Vec<f64>)> = Vec::new();
    for split in 0..=data.len() {
        for left in 0..3 {
            for right in 0..3 {
                let idx: Vec<usize> = (0..data.len()).map(|i| if i < split { left } else { right }).collect();
                let y: Vec<f64> = data.iter().zip(&idx).map(|(d, &i)| d.centers[i]).collect();
                if candidates.iter().any(|c| c.2 == y) {
                    continue;
                }
                let rss = fit_line(&x, &y).rss;
                candidates.push((rss, idx, y));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (best, second) = (&candidates[0], &candidates[1]);
    let scale = data.iter().flat_map(|d| d.centers).map(f64::abs).fold(0.0, f64::max);
    let floor = (1e-12 * scale).powi(2) * data.len() as f64;
    if second.0 <= 4.0 * best.0.max(floor) {
        return Err(Error::BranchAssignment(format!(
            "best linear-branch candidate (rss {:.3e}) is not clearly better than the next (rss {:.3e})",
            best.0, second.0
        )));
    }
    Ok(best.1.clone())
}

/// Two-stage linear extraction of f_R, Δf, c and α from peak centers.
///
/// Stage 1 fits the linear branch f_R + Δf·α·c·δV_A. Stage 2 fits the sum of the
/// other two branches, f₂ + f₃ − 2f_R − Δf·α·c·δV_A = 3Δf + Δf·c·δV_A.
/// Uncertainties are first-order propagated from both stages.
pub fn extract_model_params(data: &[PeakCenters]) -> Result<FitResult> {
    let mut xs: Vec<f64> = data.iter().map(|d| d.dv_a).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 distinct δV_A values, got {}", xs.len())));
    }
    if data.iter().any(|d| !d.dv_a.is_finite() || d.centers.iter().any(|c| !c.is_finite())) {
        return Err(Error::InvalidInput("non-finite peak center".into()));
    }
    let mut sorted: Vec<PeakCenters> = data.to_vec();
    sorted.sort_by(|a, b| a.dv_a.total_cmp(&b.dv_a));
    for d in &mut sorted {
        d.centers.sort_by(f64::total_cmp);
    }

    let branch = assign_linear_branch(&sorted)?;
    let x: Vec<f64> = sorted.iter().map(|d| d.dv_a).collect();
    let lin: Vec<f64> = sorted.iter().zip(&branch).map(|(d, &i)| d.centers[i]).collect();
    let stage1 = fit_line(&x, &lin);
    let (f_r, m1) = (stage1.intercept, stage1.slope);

    let raw: Vec<f64> = sorted.iter().zip(&branch).map(|(d, &i)| d.centers.iter().sum::<f64>() - d.centers[i]).collect();
    let stage2_raw = fit_line(&x, &raw);
    let b0 = stage2_raw.intercept - 2.0 * f_r;
    let b1 = stage2_raw.slope - m1;

    // covariance of q = (f_R, m1, b0, b1); the two stages use disjoint data
    let c1 = stage1.cov;
    let c2 = stage2_raw.cov;
    let mut cov = Matrix4::zeros();
    cov[(0, 0)] = c1[(0, 0)];
    cov[(0, 1)] = c1[(0, 1)];
    cov[(1, 1)] = c1[(1, 1)];
    cov[(0, 2)] = -2.0 * c1[(0, 0)];
    cov[(0, 3)] = -c1[(0, 1)];
    cov[(1, 2)] = -2.0 * c1[(0, 1)];
    cov[(1, 3)] = -c1[(1, 1)];
    cov[(2, 2)] = c2[(0, 0)] + 4.0 * c1[(0, 0)];
    cov[(2, 3)] = c2[(0, 1)] + 2.0 * c1[(0, 1)];
    cov[(3, 3)] = c2[(1, 1)] + c1[(1, 1)];
    for i in 0..4 {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }

    let delta_f = b0 / 3.0;
    let c = b1 / delta_f;
    let alpha = m1 / b1;
    let sd = |g: Vector4<f64>| (g.transpose() * cov * g)[(0, 0)].max(0.0).sqrt();

    let mut fit = FitResult {
        residual: (stage1.rss + stage2_raw.rss).sqrt(),
        converged: delta_f.is_finite() && c.is_finite() && alpha.is_finite(),
        ..Default::default()
    };
    fit.insert("f_R", f_r, sd(Vector4::new(1.0, 0.0, 0.0, 0.0)));
    fit.insert("delta_f", delta_f, sd(Vector4::new(0.0, 0.0, 1.0 / 3.0, 0.0)));
    fit.insert("c", c, sd(Vector4::new(0.0, 0.0, -3.0 * b1 / (b0 * b0), 3.0 / b0)));
    fit.insert("alpha", alpha, sd(Vector4::new(0.0, 1.0 / b1, 0.0, -m1 / (b1 * b1))));
    fit.insert("linear_slope", m1, sd(Vector4::new(0.0, 1.0, 0.0, 0.0)));
    fit.insert("sum_slope", b1, sd(Vector4::new(0.0, 0.0, 0.0, 1.0)));
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mode_frequencies, FrequencyModel};

    fn synthetic(fm: &FrequencyModel, dvs: &[f64]) -> Vec<PeakCenters> {
        dvs.iter().map(|&dv| PeakCenters { dv_a: dv, centers: mode_frequencies(fm, dv) }).collect()
    }

    fn dvs() -> Vec<f64> {
        (-20i32..=20).filter(|i| i.abs() >= 5).map(|i| i as f64 * 0.1).collect()
    }

    #[test]
    fn noiseless_recovery() {
        let fm = FrequencyModel::fitted();
        let fit = extract_model_params(&synthetic(&fm, &dvs())).unwrap();
        assert!((fit.value("f_R") - 3876.60).abs() < 1e-9);
        assert!((fit.value("delta_f") - 3.299).abs() < 1e-9);
        assert!((fit.value("c") - -1.202).abs() < 1e-9);
        assert!((fit.value("alpha") - -0.383).abs() < 1e-9);
        assert!(fit.uncertainties.values().all(|s| *s >= 0.0 && *s < 1e-6));
    }

    #[test]
    fn alpha_invariant_under_voltage_rescale() {
        let fm = FrequencyModel::fitted();
        let lambda = 2.5;
        let scaled = FrequencyModel::new(fm.f_r, fm.delta_f, fm.c / lambda, fm.alpha).unwrap();
        let dv: Vec<f64> = dvs().iter().map(|v| v * lambda).collect();
        let fit = extract_model_params(&synthetic(&scaled, &dv)).unwrap();
        assert!((fit.value("alpha") - fm.alpha).abs() < 1e-9);
        assert!((fit.value("c") - fm.c / lambda).abs() < 1e-9);
    }

    #[test]
    fn needs_four_offsets() {
        let fm = FrequencyModel::fitted();
        assert!(extract_model_params(&synthetic(&fm, &[-1.0, -0.5, 0.5])).is_err());
    }

    #[test]
    fn ambiguous_assignment() {
        // three parallel straight lines: any branch fits equally well
        let data: Vec<PeakCenters> =
            (0..6).map(|i| i as f64).map(|x| PeakCenters { dv_a: x, centers: [x, x + 1.0, x + 2.0] }).collect();
        assert!(matches!(extract_model_params(&data), Err(Error::BranchAssignment(_))));
    }
}
