use std::f64::consts::PI;

use super::state::{eigen_to_site, site_to_eigen};
use super::{Basis, C64, Site, SinglePhononState};
use crate::model::{eigensystem, CurvatureModel, ShimPoint};

/// Evolve for `t` ms at fixed shims. The result is expressed in the input's basis.
pub fn evolve_static(
    state: &SinglePhononState,
    model: &CurvatureModel,
    shims: ShimPoint,
    t: f64,
) -> SinglePhononState {
    let ms = eigensystem(model, shims);
    let df = model.delta_f();
    let mut eigen = site_to_eigen(&ms, &state.site_amplitudes());
    for (a, dk) in eigen.iter_mut().zip(ms.delta_k_values) {
        *a *= C64::from_polar(1.0, 2.0 * PI * df * dk * t);
    }
    let site = eigen_to_site(&ms, &eigen);
    match state.basis {
        Basis::Site => SinglePhononState { amplitudes: site, basis: Basis::Site },
        Basis::Eigen(other) => SinglePhononState {
            amplitudes: site_to_eigen(&other, &site),
            basis: Basis::Eigen(other),
        },
    }
}

/// Probability that a phonon injected at `source` is found there after `t` ms.
///
/// Closed form: Σ w_j² + 2 Σ_{j<k} w_j w_k cos(2π(δf_k − δf_j)t) with w_j = |c_source^(j)|².
/// Degenerate bands share a frequency, so their terms merge into the projector
/// weight and the value does not depend on the basis chosen inside the pair.
pub fn return_probability(model: &CurvatureModel, shims: ShimPoint, t: f64, source: Site) -> f64 {
    let ms = eigensystem(model, shims);
    let w = ms.site_weights(source.index());
    let f = ms.delta_k_values.map(|x| x * model.delta_f());
    let mut p: f64 = w.iter().map(|x| x * x).sum();
    for j in 0..3 {
        for k in (j + 1)..3 {
            p += 2.0 * w[j] * w[k] * (2.0 * PI * (f[k] - f[j]) * t).cos();
        }
    }
    p.clamp(0.0, 1.0)
}

/// Two resonant sites coupled at `delta_f_pair` kHz: probability of staying put.
pub fn two_site_exchange(delta_f_pair: f64, t: f64) -> f64 {
    (2.0 * PI * delta_f_pair * t).cos().powi(2)
}
