use serde::Serialize;

use super::{FringeTrace, TraceMetadata};
use crate::analysis::{fit_single_sinusoid, phase_difference, FitResult};
use crate::dynamics::{default_dt, evolve_static, propagate, return_probability, Site, SinglePhononState};
use crate::model::{eigensystem, CurvatureModel, ShimPoint};
use crate::paths::{build_path_pair_with, PathFamily, PathOptions, PathPair, ShimPath};
use crate::{Error, Result};

fn check_inputs(delays: &[f64], contrast: f64) -> Result<()> {
    if delays.is_empty() {
        return Err(Error::InvalidInput("delay list is empty".into()));
    }
    if delays.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::InvalidInput("delays must be finite and non-negative".into()));
    }
    if !(0.0..=1.0).contains(&contrast) {
        return Err(Error::InvalidInput(format!("contrast must lie in [0, 1], got {contrast}")));
    }
    Ok(())
}

/// Bright probability after a phonon is injected into C with the shims held fixed.
pub fn exchange_trace(model: &CurvatureModel, shims: ShimPoint, delays: &[f64], contrast: f64) -> Result<FringeTrace> {
    check_inputs(delays, contrast)?;
    let p = delays
        .iter()
        .map(|&t| (contrast * (1.0 - return_probability(model, shims, t, Site::C))).clamp(0.0, 1.0))
        .collect();
    FringeTrace::ideal(
        delays.to_vec(),
        p,
        TraceMetadata { label: format!("exchange s=({:.6}, {:.6})", shims.s_a, shims.s_b), ..Default::default() },
    )
}

/// δf₃ − δf₂ at `shims`, kHz: the tone of a phonon in C at the start point.
pub fn fringe_tone(model: &CurvatureModel, shims: ShimPoint) -> f64 {
    let dk = eigensystem(model, shims).delta_k_values;
    (dk[2] - dk[1]) * model.delta_f()
}

/// 64 delays spanning two periods of the start-point fringe tone.
pub fn default_fringe_delays(model: &CurvatureModel, start: ShimPoint) -> Vec<f64> {
    let span = 2.0 / fringe_tone(model, start);
    (0..64).map(|i| span * i as f64 / 64.0).collect()
}

fn fringe_after(
    model: &CurvatureModel,
    path: &ShimPath,
    delays: &[f64],
    contrast: f64,
) -> Result<(FringeTrace, SinglePhononState)> {
    let schedule = path.default_schedule()?;
    let psi0 = SinglePhononState::at_site(Site::C);
    let run = propagate(&psi0, model, &schedule, default_dt(model, &schedule))?;
    let start = path.start();
    let p = delays
        .iter()
        .map(|&t| {
            let psi = evolve_static(&run.state, model, start, t);
            (contrast * (1.0 - psi.amplitudes[Site::C.index()].norm_sqr())).clamp(0.0, 1.0)
        })
        .collect();
    let meta = TraceMetadata {
        label: if path.winding() == 0 { "non_enclosing".into() } else { "enclosing".into() },
        family: Some(path.family()),
        duration_ms: Some(path.duration()),
        seed: None,
    };
    Ok((FringeTrace::ideal(delays.to_vec(), p, meta)?, run.state))
}

/// Fringes after traversing each member of `pair` (enclosing, non-enclosing).
pub fn run_interference(
    model: &CurvatureModel,
    pair: &PathPair,
    delays: &[f64],
    contrast: f64,
) -> Result<(FringeTrace, FringeTrace)> {
    check_inputs(delays, contrast)?;
    let (a, b) = rayon::join(
        || fringe_after(model, &pair.enclosing, delays, contrast),
        || fringe_after(model, &pair.non_enclosing, delays, contrast),
    );
    Ok((a?.0, b?.0))
}

/// A fitted Berry-phase fringe pair.
#[derive(Debug, Clone)]
pub struct BerryRun {
    pub enclosing: FringeTrace,
    pub non_enclosing: FringeTrace,
    pub fit_enclosing: FitResult,
    pub fit_non_enclosing: FitResult,
    /// |wrap(φ_enclosing − φ_non-enclosing)| ∈ [0, π].
    pub delta_phi: f64,
    /// Band populations at the start-point eigenbasis after each path.
    pub populations: [[f64; 3]; 2],
}

/// Traverse both paths, record fringes, and fit one sinusoid to each.
pub fn run_berry(model: &CurvatureModel, pair: &PathPair, delays: &[f64], contrast: f64) -> Result<BerryRun> {
    check_inputs(delays, contrast)?;
    let (a, b) = rayon::join(
        || fringe_after(model, &pair.enclosing, delays, contrast),
        || fringe_after(model, &pair.non_enclosing, delays, contrast),
    );
    let ((enc, psi_enc), (non, psi_non)) = (a?, b?);
    let fit_enclosing = fit_single_sinusoid(&enc.delays, &enc.p_bright)?;
    let fit_non_enclosing = fit_single_sinusoid(&non.delays, &non.p_bright)?;
    let delta_phi = phase_difference(fit_enclosing.value("phase"), fit_non_enclosing.value("phase")).abs();
    let modes = eigensystem(model, pair.enclosing.start());
    Ok(BerryRun {
        populations: [psi_enc.band_populations(&modes), psi_non.band_populations(&modes)],
        enclosing: enc,
        non_enclosing: non,
        fit_enclosing,
        fit_non_enclosing,
        delta_phi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Traversal time, ms.
    pub duration_ms: f64,
    /// Fitted |Δφ|, rad; `None` when the point failed.
    pub delta_phi: Option<f64>,
    pub flag: Option<String>,
}

/// Δφ versus traversal time for one family; points run concurrently and a
/// failing point is flagged without stopping the sweep.
pub fn adiabaticity_sweep(
    model: &CurvatureModel,
    family: PathFamily,
    durations: &[f64],
    delays: &[f64],
    n: usize,
    opts: &PathOptions,
) -> Result<Vec<SweepPoint>> {
    use rayon::prelude::*;
    if durations.is_empty() || durations.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidInput("sweep durations must be positive".into()));
    }
    check_inputs(delays, 1.0)?;
    let base = build_path_pair_with(model, family, durations[0], n, opts)?;
    Ok(durations
        .par_iter()
        .map(|&t| {
            let res = base.with_duration(t).and_then(|pair| run_berry(model, &pair, delays, 1.0));
            match res {
                Ok(run) if run.fit_enclosing.converged && run.fit_non_enclosing.converged => {
                    SweepPoint { duration_ms: t, delta_phi: Some(run.delta_phi), flag: None }
                }
                Ok(_) => SweepPoint { duration_ms: t, delta_phi: None, flag: Some("fringe fit did not converge".into()) },
                Err(e) => SweepPoint { duration_ms: t, delta_phi: None, flag: Some(e.to_string()) },
            }
        })
        .collect())
}
