use nalgebra::{DMatrix, DVector};

/// A least-squares problem: residuals r(p) and their Jacobian ∂r/∂p.
pub trait Residuals {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged once ‖Δp‖ ≤ tol·(‖p‖ + tol).
    pub relative_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, relative_tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: DVector<f64>,
    /// s²·(JᵀJ)⁻¹ at the solution, s² = RSS/(m − n).
    pub covariance: DMatrix<f64>,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Marquardt-damped Gauss-Newton.
pub fn levenberg_marquardt<R: Residuals>(problem: &R, p0: DVector<f64>, opts: LmOptions) -> LmOutcome {
    let mut p = p0;
    let mut r = problem.residuals(&p);
    let mut rss = r.norm_squared();
    let m = r.len();
    let n = p.len();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    if !rss.is_finite() {
        return finish(problem, p, rss, 0, false, m, n);
    }

    while iterations < opts.max_iterations {
        iterations += 1;
        if rss <= 1e-30 * m as f64 {
            converged = true;
            break;
        }
        let j = problem.jacobian(&p);
        let a = j.transpose() * &j;
        let g = j.transpose() * &r;
        let diag_floor = 1e-12 * a.diagonal().max().max(1e-300);

        loop {
            let mut damped = a.clone();
            for i in 0..n {
                damped[(i, i)] += lambda * a[(i, i)].max(diag_floor);
            }
            let step = match damped.clone().cholesky() {
                Some(ch) => -ch.solve(&g),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        break;
                    }
                    continue;
                }
            };
            let small = step.norm() <= opts.relative_tolerance * (p.norm() + opts.relative_tolerance);
            let trial = &p + &step;
            let r_trial = problem.residuals(&trial);
            let rss_trial = r_trial.norm_squared();
            if rss_trial.is_finite() && rss_trial <= rss {
                p = trial;
                r = r_trial;
                rss = rss_trial;
                lambda = (lambda * 0.3).max(1e-15);
                if small {
                    converged = true;
                }
                break;
            }
            if small {
                converged = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
        }
        if converged || lambda > 1e20 {
            break;
        }
    }
    finish(problem, p, rss, iterations, converged, m, n)
}

fn finish<R: Residuals>(problem: &R, p: DVector<f64>, rss: f64, iterations: usize, converged: bool, m: usize, n: usize) -> LmOutcome {
    let j = problem.jacobian(&p);
    let jtj = j.transpose() * &j;
    let s2 = if m > n { rss / (m - n) as f64 } else { 0.0 };
    let inv = jtj
        .clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|x| x.is_finite()))
        .unwrap_or_else(|| jtj.pseudo_inverse(1e-14).unwrap_or_else(|_| DMatrix::zeros(n, n)));
    LmOutcome { params: p, covariance: inv * s2, rss, iterations, converged: converged && rss.is_finite() }
}
