use std::f64::consts::PI;

use super::{ShimSchedule, SinglePhononState, C64};
use crate::model::{eigensystem, CurvatureModel, ModeSystem, ShimPoint};
use crate::{Error, Result};

/// Norm drift above which a run is rejected.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct PropagationResult {
    /// Final state, site basis.
    pub state: SinglePhononState,
    /// Largest |Σ|ψ|² − 1| seen at any step.
    pub max_norm_drift: f64,
    /// Largest change of |Σ|ψ|²| across one step.
    pub max_step_drift: f64,
    /// ∫ 2π·δf_j(t) dt per band, rad.
    pub band_phases: [f64; 3],
    pub steps: usize,
    pub dt: f64,
}

/// Frequency matrix W = Δf·(ones + shim diagonal), kHz.
fn frequency_matrix(model: &CurvatureModel, s: ShimPoint) -> [[f64; 3]; 3] {
    let d = s.shim_diagonal(model.alpha);
    let df = model.delta_f();
    let mut w = [[df; 3]; 3];
    for i in 0..3 {
        w[i][i] += df * d[i];
    }
    w
}

/// dψ/dt = +i·2π·W·ψ
fn rhs(w: &[[f64; 3]; 3], psi: &[C64; 3]) -> [C64; 3] {
    let i2pi = C64::new(0.0, 2.0 * PI);
    [0, 1, 2].map(|r| i2pi * (w[r][0] * psi[0] + w[r][1] * psi[1] + w[r][2] * psi[2]))
}

fn axpy(psi: &[C64; 3], h: f64, k: &[C64; 3]) -> [C64; 3] {
    [0, 1, 2].map(|i| psi[i] + k[i] * h)
}

fn spectral_radius(model: &CurvatureModel, s: ShimPoint) -> f64 {
    let ms: ModeSystem = eigensystem(model, s);
    model.delta_f() * ms.delta_k_values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// min(1 µs, T/4000, 0.01 rad / (2π·max|δf|)).
pub fn default_dt(model: &CurvatureModel, schedule: &ShimSchedule) -> f64 {
    // The spectral norm is convex, so the vertices bound every interpolated W.
    let rho = schedule.points().iter().map(|&s| spectral_radius(model, s)).fold(0.0f64, f64::max);
    let mut dt = (1e-3f64).min(schedule.duration() / 4000.0);
    if rho > 0.0 {
        dt = dt.min(0.01 / (2.0 * PI * rho));
    }
    dt
}

/// Fixed-step RK4 integration of the single-phonon Schrödinger equation.
pub fn propagate(
    state: &SinglePhononState,
    model: &CurvatureModel,
    schedule: &ShimSchedule,
    dt: f64,
) -> Result<PropagationResult> {
    state.check_normalized()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let total = schedule.duration();
    let steps = (total / dt).ceil().max(1.0) as usize;
    let h = total / steps as f64;

    let mut psi = state.site_amplitudes();
    let norm0: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let mut prev_norm = norm0;
    let mut max_norm_drift = 0.0f64;
    let mut max_step_drift = 0.0f64;

    let band_freqs = |s: ShimPoint| eigensystem(model, s).delta_k_values.map(|x| 2.0 * PI * model.delta_f() * x);
    let mut phases = [0.0; 3];
    let mut f_prev = band_freqs(schedule.at(0.0));
    let mut w0 = frequency_matrix(model, schedule.at(0.0));

    for n in 0..steps {
        let t = n as f64 * h;
        let wm = frequency_matrix(model, schedule.at(t + 0.5 * h));
        let w1 = frequency_matrix(model, schedule.at(t + h));
        let k1 = rhs(&w0, &psi);
        let k2 = rhs(&wm, &axpy(&psi, 0.5 * h, &k1));
        let k3 = rhs(&wm, &axpy(&psi, 0.5 * h, &k2));
        let k4 = rhs(&w1, &axpy(&psi, h, &k3));
        for i in 0..3 {
            psi[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
        w0 = w1;

        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        max_step_drift = max_step_drift.max((norm - prev_norm).abs());
        max_norm_drift = max_norm_drift.max((norm - 1.0).abs());
        prev_norm = norm;
        if max_norm_drift > MAX_NORM_DRIFT || !norm.is_finite() {
            return Err(Error::StepSize { drift: max_norm_drift, dt: h });
        }

        let f_next = band_freqs(schedule.at(t + h));
        for j in 0..3 {
            phases[j] += 0.5 * h * (f_prev[j] + f_next[j]);
        }
        f_prev = f_next;
    }

    Ok(PropagationResult {
        state: SinglePhononState { amplitudes: psi, basis: super::Basis::Site },
        max_norm_drift,
        max_step_drift,
        band_phases: phases,
        steps,
        dt: h,
    })
}
