use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use super::{parse_list, CliError, Command, Output, RunConfig};
use crate::analysis::{
    bootstrap_ci, extract_model_params, fit_single_sinusoid, fit_sinusoid_sum, phase_difference, FitReport, FitResult,
    PeakCenters,
};
use crate::dynamics::ShimSchedule;
use crate::experiment::{
    adiabaticity_sweep, default_fringe_delays, exchange_trace, extract_peak_centers, run_berry, sample_shots,
    synthetic_spectrum, FringeTrace, SpectrumMap,
};
use crate::model::{eigen_surfaces, mode_frequencies, shim_grid, Band, CurvatureModel, ShimPoint};
use crate::paths::{
    build_path_pair_with, discrete_berry_phase, dynamical_phase, special_points, PathFamily, PathPair, ShimPath,
};

pub(super) fn dispatch(cmd: &Command, cfg: &mut RunConfig) -> Result<String, CliError> {
    match cmd {
        Command::Surfaces(a) => {
            if let Some(g) = a.grid {
                cfg.surfaces.grid = g;
            }
            if let Some(r) = a.range {
                cfg.surfaces.range = r;
            }
            surfaces(cfg)
        }
        Command::Spectrum(a) => {
            if let Some(v) = a.linewidth {
                cfg.spectrum.linewidth_khz = v;
            }
            if let Some(v) = a.noise {
                cfg.spectrum.noise = v;
            }
            spectrum(cfg)
        }
        Command::Exchange(a) => {
            let e = &mut cfg.exchange;
            if let Some(v) = &a.dva_mv {
                e.dva_mv = v.clone();
            }
            if let Some(v) = a.t_max_ms {
                e.t_max_ms = v;
            }
            if let Some(v) = a.points {
                e.points = v;
            }
            if let Some(v) = a.contrast {
                e.contrast = v;
            }
            if let Some(v) = a.shots {
                e.shots = v;
            }
            exchange(cfg)
        }
        Command::Berry(a) => {
            let b = &mut cfg.berry;
            if let Some(v) = a.family {
                b.family = v;
            }
            if let Some(v) = a.t_us {
                b.t_us = v;
            }
            if let Some(v) = a.waypoints {
                b.waypoints = v;
            }
            if let Some(v) = a.contrast {
                b.contrast = v;
            }
            if let Some(v) = a.shots {
                b.shots = v;
            }
            if let Some(v) = a.profile {
                cfg.paths.speed_profile = v;
            }
            berry(cfg)
        }
        Command::Sweep(a) => {
            if let Some(v) = a.family {
                cfg.sweep.family = v;
            }
            if let Some(v) = &a.t_us {
                cfg.sweep.t_us = parse_list(v)?;
            }
            if let Some(v) = a.waypoints {
                cfg.sweep.waypoints = v;
            }
            if let Some(v) = a.profile {
                cfg.paths.speed_profile = v;
            }
            sweep(cfg)
        }
        Command::FitSpectrum(a) => {
            if let Some(v) = &a.input {
                cfg.fit_spectrum.input = Some(v.clone());
            }
            if let Some(v) = a.bootstrap {
                cfg.fit_spectrum.bootstrap = v;
            }
            fit_spectrum(cfg)
        }
        Command::FitFringes(a) => {
            let f = &mut cfg.fit_fringes;
            if let Some(v) = &a.input {
                f.input = Some(v.clone());
            }
            if let Some(v) = &a.reference {
                f.reference = Some(v.clone());
            }
            if let Some(v) = a.tones {
                f.tones = v;
            }
            if let Some(v) = a.bootstrap {
                f.bootstrap = v;
            }
            fit_fringes(cfg)
        }
    }
}

fn model(cfg: &RunConfig) -> Result<CurvatureModel, CliError> {
    Ok(cfg.model.curvature_model()?)
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn check_bootstrap(n: usize) -> Result<(), CliError> {
    if n != 0 && n < 100 {
        return Err(CliError::config(format!("bootstrap needs 0 or at least 100 trials, got {n}")));
    }
    Ok(())
}

fn surfaces(cfg: &RunConfig) -> Result<String, CliError> {
    let s = &cfg.surfaces;
    if s.grid < 2 || !(s.range > 0.0) {
        return Err(CliError::config("surfaces need grid >= 2 and range > 0"));
    }
    let m = model(cfg)?;
    let grid = shim_grid(s.grid, s.range);
    let dk = eigen_surfaces(&m, &grid)?;
    let mut out = Output::new(&cfg.out_dir)?;
    out.write("surfaces.csv", |w| {
        writeln!(w, "sA,sB,dk1,dk2,dk3")?;
        for (p, d) in grid.iter().zip(&dk) {
            writeln!(w, "{:.6},{:.6},{:.12},{:.12},{:.12}", p.s_a, p.s_b, d[0], d[1], d[2])?;
        }
        Ok(())
    })?;
    Ok(format!("surfaces: {}x{} grid, {} points", s.grid, s.grid, grid.len()))
}

fn spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let o = &cfg.spectrum;
    let fm = cfg.model.frequency_model()?;
    let (dv, df) = (o.dv_grid()?, o.df_grid()?);
    let map = synthetic_spectrum(&fm, &dv, &df, o.linewidth_khz, o.noise, cfg.seed)?;
    let mut out = Output::new(&cfg.out_dir)?;
    out.write("spectrum.csv", |w| map.write_csv(w))?;
    out.write("mode_curves.csv", |w| {
        writeln!(w, "dVA_mV,df1_kHz,df2_kHz,df3_kHz")?;
        for &v in &dv {
            let f = mode_frequencies(&fm, v).map(|x| x - fm.f_r);
            writeln!(w, "{v:.6},{:.9},{:.9},{:.9}", f[0], f[1], f[2])?;
        }
        Ok(())
    })?;
    Ok(format!("spectrum: {} x {} map (dVA x df)", dv.len(), df.len()))
}

fn exchange(cfg: &RunConfig) -> Result<String, CliError> {
    let e = &cfg.exchange;
    if e.points < 16 || !(e.t_max_ms > 0.0) || e.dva_mv.is_empty() {
        return Err(CliError::config("exchange needs points >= 16, t_max_ms > 0 and at least one dva_mv"));
    }
    let m = model(cfg)?;
    let fm = cfg.model.frequency_model()?;
    let delays: Vec<f64> = (0..e.points).map(|i| e.t_max_ms * i as f64 / (e.points - 1) as f64).collect();

    let results: Vec<Result<(f64, FringeTrace, FitResult), CliError>> = e
        .dva_mv
        .par_iter()
        .enumerate()
        .map(|(i, &dv)| {
            let shims = ShimPoint::from_millivolts(dv, 0.0, fm.c);
            let mut tr = exchange_trace(&m, shims, &delays, e.contrast)?;
            if e.shots > 0 {
                tr = sample_shots(&tr, e.shots, cfg.seed.wrapping_add(i as u64))?;
            }
            let fit = fit_sinusoid_sum(&tr.delays, &tr.p_bright, e.tones)?;
            Ok((dv, tr, fit))
        })
        .collect();

    let mut out = Output::new(&cfg.out_dir)?;
    let mut report = Vec::new();
    for r in results {
        let (dv, tr, fit) = r?;
        out.write(&format!("exchange_dva_{dv:+.3}.csv"), |w| tr.write_csv(w))?;
        let f = mode_frequencies(&fm, dv);
        let mut model_diffs = [f[1] - f[0], f[2] - f[1], f[2] - f[0]];
        model_diffs.sort_by(f64::total_cmp);
        let fitted: Vec<f64> = (1..=e.tones).map(|k| fit.value(&format!("frequency_{k}"))).collect();
        report.push(json!({
            "dVA_mV": dv,
            "model_difference_frequencies_kHz": model_diffs,
            "fitted_frequencies_kHz": fitted,
            "fit": FitReport::new(&fit, None),
        }));
    }
    out.write_text("exchange.json", &json_text(&json!({ "traces": report })))?;
    Ok(format!("exchange: {} traces, {} delays each", e.dva_mv.len(), e.points))
}

fn read_schedule(path: &Path) -> Result<ShimSchedule, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    Ok(ShimSchedule::from_json(&text)?)
}

fn build_pair(cfg: &RunConfig, m: &CurvatureModel, duration: f64) -> Result<PathPair, CliError> {
    let b = &cfg.berry;
    if b.family != PathFamily::Custom {
        return Ok(build_path_pair_with(m, b.family, duration, b.waypoints, &cfg.paths)?);
    }
    let (Some(enc), Some(non)) = (&b.custom_enclosing, &b.custom_non_enclosing) else {
        return Err(CliError::config("custom family needs berry.custom_enclosing and berry.custom_non_enclosing"));
    };
    let load = |p: &Path| -> Result<ShimPath, CliError> {
        let s = read_schedule(p)?;
        Ok(ShimPath::new(m, s.points().to_vec(), duration, PathFamily::Custom, cfg.paths.speed_profile, cfg.paths.ramp_fraction)?)
    };
    let pair = PathPair { enclosing: load(enc)?, non_enclosing: load(non)? };
    if pair.enclosing.start() != pair.non_enclosing.start() {
        return Err(CliError::config("custom paths must share their start point"));
    }
    Ok(pair)
}

fn berry(cfg: &RunConfig) -> Result<String, CliError> {
    let b = &cfg.berry;
    if !(b.t_us > 0.0) {
        return Err(CliError::config("berry T_us must be positive"));
    }
    let m = model(cfg)?;
    let pair = build_pair(cfg, &m, b.t_us * 1e-3)?;
    let delays = default_fringe_delays(&m, pair.enclosing.start());
    let run = run_berry(&m, &pair, &delays, b.contrast)?;

    let (mut enc, mut non) = (run.enclosing.clone(), run.non_enclosing.clone());
    let (mut fit_enc, mut fit_non, mut dphi) = (run.fit_enclosing.clone(), run.fit_non_enclosing.clone(), run.delta_phi);
    if b.shots > 0 {
        enc = sample_shots(&enc, b.shots, cfg.seed)?;
        non = sample_shots(&non, b.shots, cfg.seed.wrapping_add(1))?;
        fit_enc = fit_single_sinusoid(&enc.delays, &enc.p_bright)?;
        fit_non = fit_single_sinusoid(&non.delays, &non.p_bright)?;
        dphi = phase_difference(fit_enc.value("phase"), fit_non.value("phase")).abs();
    }

    let mut oracle = serde_json::Map::new();
    for (name, path) in [("enclosing", &pair.enclosing), ("non_enclosing", &pair.non_enclosing)] {
        let mut bands = serde_json::Map::new();
        for band in Band::ALL {
            let geo = discrete_berry_phase(&m, path, band).map(|p| p.value).ok();
            let dyn_phase = dynamical_phase(&m, path, band).ok();
            bands.insert(
                format!("band_{band}"),
                json!({ "discrete_berry_phase_rad": geo, "dynamical_phase_rad": dyn_phase }),
            );
        }
        oracle.insert(name.into(), json!({ "winding": path.winding(), "bands": bands }));
    }
    let report = json!({
        "family": pair.enclosing.family(),
        "T_us": b.t_us,
        "speed_profile": cfg.paths.speed_profile,
        "shots": b.shots,
        "delta_phi_rad": dphi,
        "delta_phi_over_pi": dphi / PI,
        "ideal_delta_phi_over_pi": run.delta_phi / PI,
        "band_populations": { "enclosing": run.populations[0], "non_enclosing": run.populations[1] },
        "fits": { "enclosing": FitReport::new(&fit_enc, None), "non_enclosing": FitReport::new(&fit_non, None) },
        "paths": oracle,
    });

    let mut out = Output::new(&cfg.out_dir)?;
    out.write("berry_enclosing.csv", |w| enc.write_csv(w))?;
    out.write("berry_non_enclosing.csv", |w| non.write_csv(w))?;
    out.write_text("path_enclosing.json", &pair.enclosing.default_schedule()?.to_json())?;
    out.write_text("path_non_enclosing.json", &pair.non_enclosing.default_schedule()?.to_json())?;
    out.write_text("berry.json", &json_text(&report))?;
    Ok(format!("berry: dphi = {:.3} pi", dphi / PI))
}

fn sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let s = &cfg.sweep;
    if s.t_us.is_empty() || s.t_us.iter().any(|t| !(*t > 0.0)) {
        return Err(CliError::config("sweep T_us values must be positive"));
    }
    let m = model(cfg)?;
    let (start, _) = special_points(m.alpha)?;
    let delays = default_fringe_delays(&m, start);
    let durations: Vec<f64> = s.t_us.iter().map(|t| t * 1e-3).collect();
    let points = adiabaticity_sweep(&m, s.family, &durations, &delays, s.waypoints, &cfg.paths)?;
    let mut out = Output::new(&cfg.out_dir)?;
    out.write("sweep.csv", |w| {
        writeln!(w, "T_us,dphi_over_pi,flag")?;
        for p in &points {
            let d = p.delta_phi.map(|v| format!("{:.6}", v / PI)).unwrap_or_default();
            let flag = p.flag.clone().unwrap_or_default().replace([',', '\n'], ";");
            writeln!(w, "{:.3},{d},{flag}", p.duration_ms * 1e3)?;
        }
        Ok(())
    })?;
    let vals: Vec<f64> = points.iter().filter_map(|p| p.delta_phi).map(|v| v / PI).collect();
    let flagged = points.len() - vals.len();
    let range = match (vals.first(), vals.last()) {
        (Some(a), Some(b)) => format!("dphi/pi {a:.3} at {:.0} us to {b:.3} at {:.0} us", s.t_us[0], s.t_us[s.t_us.len() - 1]),
        _ => "no valid points".into(),
    };
    Ok(format!("sweep: {} points, {range}, {flagged} flagged", points.len()))
}

fn read_file(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError::config(format!("cannot open {}: {e}", path.display())))
}

fn fit_spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let f = &cfg.fit_spectrum;
    check_bootstrap(f.bootstrap)?;
    let o = &cfg.spectrum;
    let fm = cfg.model.frequency_model()?;
    let map = match &f.input {
        Some(p) => SpectrumMap::read_csv(read_file(p)?)?,
        None => synthetic_spectrum(&fm, &o.dv_grid()?, &o.df_grid()?, o.linewidth_khz, o.noise, cfg.seed)?,
    };
    let centers = extract_peak_centers(&map, &fm, o.linewidth_khz, o.window_points)?;
    let fit = extract_model_params(&centers)?;
    let boot = if f.bootstrap > 0 {
        Some(bootstrap_ci(&centers, |rows: &[PeakCenters]| extract_model_params(rows), f.bootstrap, cfg.seed)?)
    } else {
        None
    };
    let mut out = Output::new(&cfg.out_dir)?;
    out.write("peaks.csv", |w| {
        writeln!(w, "dVA_mV,f1_kHz,f2_kHz,f3_kHz")?;
        for pc in &centers {
            writeln!(w, "{:.6},{:.9},{:.9},{:.9}", pc.dv_a, pc.centers[0], pc.centers[1], pc.centers[2])?;
        }
        Ok(())
    })?;
    out.write_text("fit_spectrum.json", &(FitReport::new(&fit, boot.as_ref()).to_json() + "\n"))?;
    Ok(format!(
        "fit-spectrum: f_R = {:.3} kHz, delta_f = {:.4} kHz, c = {:.4} /mV, alpha = {:.4} ({} columns)",
        fit.value("f_R"),
        fit.value("delta_f"),
        fit.value("c"),
        fit.value("alpha"),
        centers.len()
    ))
}

fn fit_fringes(cfg: &RunConfig) -> Result<String, CliError> {
    let f = &cfg.fit_fringes;
    check_bootstrap(f.bootstrap)?;
    let input = f.input.as_ref().ok_or_else(|| CliError::config("fit-fringes needs an input trace (--input)"))?;
    let trace = FringeTrace::read_csv(read_file(input)?)?;
    let mut out = Output::new(&cfg.out_dir)?;

    let Some(reference) = &f.reference else {
        let k = f.tones;
        let fit = fit_sinusoid_sum(&trace.delays, &trace.p_bright, k)?;
        let rows: Vec<(f64, f64)> = trace.delays.iter().copied().zip(trace.p_bright.iter().copied()).collect();
        let boot = if f.bootstrap > 0 {
            let fitter = |r: &[(f64, f64)]| {
                let (t, y): (Vec<f64>, Vec<f64>) = r.iter().copied().unzip();
                fit_sinusoid_sum(&t, &y, k)
            };
            Some(bootstrap_ci(&rows, fitter, f.bootstrap, cfg.seed)?)
        } else {
            None
        };
        out.write_text("fit_fringes.json", &(FitReport::new(&fit, boot.as_ref()).to_json() + "\n"))?;
        let freqs: Vec<String> = (1..=k).map(|j| format!("{:.4}", fit.value(&format!("frequency_{j}")))).collect();
        return Ok(format!("fit-fringes: frequencies = [{}] kHz", freqs.join(", ")));
    };

    let refr = FringeTrace::read_csv(read_file(reference)?)?;
    if refr.delays != trace.delays {
        return Err(CliError::config("input and reference traces must share their delays"));
    }
    let pair_fit = |idx: &[usize]| -> crate::Result<FitResult> {
        let t: Vec<f64> = idx.iter().map(|&i| trace.delays[i]).collect();
        let a: Vec<f64> = idx.iter().map(|&i| trace.p_bright[i]).collect();
        let b: Vec<f64> = idx.iter().map(|&i| refr.p_bright[i]).collect();
        let (fa, fb) = (fit_single_sinusoid(&t, &a)?, fit_single_sinusoid(&t, &b)?);
        let d = phase_difference(fa.value("phase"), fb.value("phase"));
        let mut r = FitResult {
            converged: fa.converged && fb.converged,
            residual: fa.residual.hypot(fb.residual),
            iterations: fa.iterations + fb.iterations,
            ..Default::default()
        };
        r.insert("delta_phi", d, fa.sigma("phase").hypot(fb.sigma("phase")));
        r.insert("abs_delta_phi_over_pi", d.abs() / PI, fa.sigma("phase").hypot(fb.sigma("phase")) / PI);
        for (tag, fit) in [("input", &fa), ("reference", &fb)] {
            for key in ["frequency", "phase", "amplitude", "offset"] {
                r.insert(&format!("{tag}_{key}"), fit.value(key), fit.sigma(key));
            }
            r.warnings.extend(fit.warnings.iter().map(|w| format!("{tag}: {w}")));
        }
        Ok(r)
    };
    let all: Vec<usize> = (0..trace.len()).collect();
    let fit = pair_fit(&all)?;
    let boot = if f.bootstrap > 0 { Some(bootstrap_ci(&all, pair_fit, f.bootstrap, cfg.seed)?) } else { None };
    out.write_text("fit_fringes.json", &(FitReport::new(&fit, boot.as_ref()).to_json() + "\n"))?;
    Ok(format!("fit-fringes: dphi = {:.3} pi", fit.value("abs_delta_phi_over_pi")))
}
