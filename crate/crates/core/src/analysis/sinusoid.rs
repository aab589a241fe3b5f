use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use super::{levenberg_marquardt, FitResult, LmOptions, Residuals};
use crate::{Error, Result};

/// Wrap an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// φ_a − φ_b wrapped into (−π, π].
pub fn phase_difference(phi_a: f64, phi_b: f64) -> f64 {
    wrap_phase(phi_a - phi_b)
}

/// |Σ (y − ȳ)·e^{−2πi f t}|² / N at each frequency.
pub fn periodogram(t: &[f64], y: &[f64], freqs: &[f64]) -> Vec<f64> {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    freqs
        .iter()
        .map(|&f| {
            let (mut re, mut im) = (0.0, 0.0);
            for (&ti, &yi) in t.iter().zip(y) {
                let (s, c) = (TAU * f * ti).sin_cos();
                re += (yi - mean) * c;
                im -= (yi - mean) * s;
            }
            (re * re + im * im) / y.len() as f64
        })
        .collect()
}

/// offset + Σ a_k cos(2π f_k t) + b_k sin(2π f_k t); p = [offset, (a, b, f)…]
struct Tones<'a> {
    t: &'a [f64],
    y: &'a [f64],
}

impl Residuals for Tones<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let k = (p.len() - 1) / 3;
        DVector::from_iterator(
            self.t.len(),
            self.t.iter().zip(self.y).map(|(&t, &y)| {
                let mut v = p[0];
                for j in 0..k {
                    let (s, c) = (TAU * p[3 * j + 3] * t).sin_cos();
                    v += p[3 * j + 1] * c + p[3 * j + 2] * s;
                }
                v - y
            }),
        )
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let k = (p.len() - 1) / 3;
        let mut jac = DMatrix::zeros(self.t.len(), p.len());
        for (i, &t) in self.t.iter().enumerate() {
            jac[(i, 0)] = 1.0;
            for j in 0..k {
                let (a, b, f) = (p[3 * j + 1], p[3 * j + 2], p[3 * j + 3]);
                let (s, c) = (TAU * f * t).sin_cos();
                jac[(i, 3 * j + 1)] = c;
                jac[(i, 3 * j + 2)] = s;
                jac[(i, 3 * j + 3)] = TAU * t * (b * c - a * s);
            }
        }
        jac
    }
}

/// Linear least squares for offset and quadratures at fixed frequencies.
fn linear_quadratures(t: &[f64], y: &[f64], freqs: &[f64]) -> DVector<f64> {
    let n = 1 + 2 * freqs.len();
    let x = DMatrix::from_fn(t.len(), n, |i, c| match c {
        0 => 1.0,
        c => {
            let (s, co) = (TAU * freqs[(c - 1) / 2] * t[i]).sin_cos();
            if c % 2 == 1 {
                co
            } else {
                s
            }
        }
    });
    let coef = x
        .clone()
        .svd(true, true)
        .solve(&DVector::from_column_slice(y), 1e-12)
        .unwrap_or_else(|_| DVector::zeros(n));
    let mut p = DVector::zeros(1 + 3 * freqs.len());
    p[0] = coef[0];
    for (j, f) in freqs.iter().enumerate() {
        p[3 * j + 1] = coef[1 + 2 * j];
        p[3 * j + 2] = coef[2 + 2 * j];
        p[3 * j + 3] = *f;
    }
    p
}

/// Local maxima of the periodogram on an oversampled grid, strongest first.
fn periodogram_peaks(t: &[f64], y: &[f64]) -> Vec<f64> {
    let span = t.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t.iter().copied().fold(f64::INFINITY, f64::min);
    let mut dts: Vec<f64> = t.windows(2).map(|w| (w[1] - w[0]).abs()).filter(|d| *d > 0.0).collect();
    dts.sort_by(f64::total_cmp);
    let dt = dts.get(dts.len() / 2).copied().unwrap_or(span);
    let fmax = 0.5 / dt;
    let df = 0.1 / span;
    let freqs: Vec<f64> = (1..).map(|i| i as f64 * df).take_while(|f| *f < fmax).collect();
    if freqs.is_empty() {
        return vec![1.0 / span];
    }
    let power = periodogram(t, y, &freqs);
    let mut peaks: Vec<(f64, f64)> = (0..freqs.len())
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { power[i - 1] };
            let right = power.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            power[i] >= left && power[i] > right
        })
        .map(|i| (power[i], freqs[i]))
        .collect();
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<f64> = peaks.into_iter().map(|p| p.1).collect();
    if out.is_empty() {
        out.push(freqs[0]);
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Fit `k` sinusoids plus an offset to a trace.
///
/// Parameters: `offset`, and for each tone j = 1..k (sorted by frequency)
/// `frequency_j`, `amplitude_j` (≥ 0) and `phase_j` ∈ (−π, π] of
/// A·cos(2πft + φ).
pub fn fit_sinusoid_sum(t: &[f64], y: &[f64], k: usize) -> Result<FitResult> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidInput(format!("tone count must be 1 to 3, got {k}")));
    }
    if t.len() != y.len() {
        return Err(Error::InvalidInput(format!("{} delays but {} values", t.len(), y.len())));
    }
    if t.len() < 3 * k + 2 {
        return Err(Error::InvalidInput(format!("{} points cannot constrain {k} tones", t.len())));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample in trace".into()));
    }
    let problem = Tones { t, y };
    let span = t.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t.iter().copied().fold(f64::INFINITY, f64::min);

    let peaks = periodogram_peaks(t, y);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    // greedy prewhitening: strongest residual peak, refit, repeat
    {
        let mut freqs: Vec<f64> = Vec::new();
        let mut resid = y.to_vec();
        for _ in 0..k {
            let cand = periodogram_peaks(t, &resid);
            let f = cand
                .iter()
                .copied()
                .find(|f| freqs.iter().all(|g| (f - g).abs() > 0.5 / span))
                .unwrap_or(cand[0] + freqs.len() as f64 / span);
            freqs.push(f);
            let out = levenberg_marquardt(&problem, linear_quadratures(t, y, &freqs), LmOptions::default());
            freqs = (0..freqs.len()).map(|j| out.params[3 * j + 3]).collect();
            let r = problem.residuals(&out.params);
            resid = r.iter().map(|v| -v).collect();
        }
        starts.push(freqs);
    }
    let pool = peaks.len().min(k + 2).max(k.min(peaks.len()));
    for combo in combinations(pool, k.min(pool)) {
        let mut freqs: Vec<f64> = combo.iter().map(|&i| peaks[i]).collect();
        while freqs.len() < k {
            freqs.push(freqs[0] * 2.0);
        }
        starts.push(freqs);
    }

    let mut best: Option<super::LmOutcome> = None;
    for freqs in starts {
        let out = levenberg_marquardt(&problem, linear_quadratures(t, y, &freqs), LmOptions::default());
        let better = match &best {
            None => true,
            Some(b) => (out.converged && !b.converged) || (out.converged == b.converged && out.rss < b.rss),
        };
        if better {
            best = Some(out);
        }
    }
    let mut out = best.expect("at least one start");
    if merge_coincident(&mut out.params, span) {
        out = levenberg_marquardt(&problem, out.params, LmOptions::default());
    }
    Ok(tones_to_fit(&out, k))
}

/// Fold tones sharing one frequency into the first of them, leaving the
/// others at zero amplitude. Returns whether anything changed.
fn merge_coincident(p: &mut DVector<f64>, span: f64) -> bool {
    let k = (p.len() - 1) / 3;
    let mut changed = false;
    for i in 0..k {
        for j in (i + 1)..k {
            let same = (p[3 * i + 3].abs() - p[3 * j + 3].abs()).abs() < 1e-3 / span;
            let live = p[3 * j + 1] != 0.0 || p[3 * j + 2] != 0.0;
            if same && live {
                let sign = p[3 * i + 3].signum() * p[3 * j + 3].signum();
                p[3 * i + 1] += p[3 * j + 1];
                p[3 * i + 2] += sign * p[3 * j + 2];
                p[3 * j + 1] = 0.0;
                p[3 * j + 2] = 0.0;
                changed = true;
            }
        }
    }
    changed
}

fn tones_to_fit(out: &super::LmOutcome, k: usize) -> FitResult {
    let p = &out.params;
    let cov = &out.covariance;
    let mut tones: Vec<usize> = (0..k).collect();
    tones.sort_by(|&a, &b| p[3 * a + 3].abs().total_cmp(&p[3 * b + 3].abs()));

    let mut fit = FitResult { residual: out.rss.sqrt(), converged: out.converged, iterations: out.iterations, ..Default::default() };
    fit.insert("offset", p[0], cov[(0, 0)].max(0.0).sqrt());
    for (rank, &j) in tones.iter().enumerate() {
        let (ia, ib, i_f) = (3 * j + 1, 3 * j + 2, 3 * j + 3);
        // a cos + b sin = A cos(θ + φ) with A cos φ = a, A sin φ = −b; a negative
        // fitted frequency is folded back with b → −b.
        let sign = if p[i_f] < 0.0 { -1.0 } else { 1.0 };
        let (a, b) = (p[ia], sign * p[ib]);
        let amp = a.hypot(b);
        let phase = wrap_phase((-b).atan2(a));
        let (vaa, vbb, vab) = (cov[(ia, ia)], cov[(ib, ib)], sign * cov[(ia, ib)]);
        let (sa, sphi) = if amp > 0.0 {
            let (da, db) = (a / amp, b / amp);
            let va = da * da * vaa + db * db * vbb + 2.0 * da * db * vab;
            let (pa, pb) = (b / (amp * amp), -a / (amp * amp));
            let vp = pa * pa * vaa + pb * pb * vbb + 2.0 * pa * pb * vab;
            (va.max(0.0).sqrt(), vp.max(0.0).sqrt())
        } else {
            (vaa.max(vbb).max(0.0).sqrt(), PI)
        };
        let n = rank + 1;
        fit.insert(&format!("frequency_{n}"), p[i_f].abs(), cov[(i_f, i_f)].max(0.0).sqrt());
        fit.insert(&format!("amplitude_{n}"), amp, sa);
        fit.insert(&format!("phase_{n}"), phase, sphi);
    }
    fit
}

/// Single-tone fit with keys `frequency`, `phase`, `amplitude`, `offset`.
///
/// An amplitude within two standard errors of zero adds an "unreliable phase"
/// warning.
pub fn fit_single_sinusoid(t: &[f64], y: &[f64]) -> Result<FitResult> {
    let raw = fit_sinusoid_sum(t, y, 1)?;
    let mut fit = FitResult { residual: raw.residual, converged: raw.converged, iterations: raw.iterations, ..Default::default() };
    fit.insert("offset", raw.value("offset"), raw.sigma("offset"));
    for key in ["frequency", "amplitude", "phase"] {
        let name = format!("{key}_1");
        fit.insert(key, raw.value(&name), raw.sigma(&name));
    }
    let amp = fit.value("amplitude");
    if amp < 1e-9 || amp < 2.0 * fit.sigma("amplitude") {
        fit.warnings.push("amplitude consistent with zero; phase unreliable".into());
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, span: f64) -> Vec<f64> {
        (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        assert!((phase_difference(3.0, -3.0) - (6.0 - TAU)).abs() < 1e-12);
        assert!((phase_difference(0.4, 0.1) + phase_difference(0.1, 0.4)).abs() < 1e-15);
    }

    #[test]
    fn single_tone_exact() {
        let t = grid(64, 0.2);
        let y: Vec<f64> = t.iter().map(|t| 0.5 + 0.4 * (TAU * 9.33 * t + 0.7).cos()).collect();
        let fit = fit_single_sinusoid(&t, &y).unwrap();
        assert!(fit.converged);
        assert!((fit.value("frequency") - 9.33).abs() < 1e-8);
        assert!((fit.value("phase") - 0.7).abs() < 1e-8);
        assert!((fit.value("amplitude") - 0.4).abs() < 1e-8);
        assert!((fit.value("offset") - 0.5).abs() < 1e-8);
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn pi_shifted_traces() {
        let t = grid(64, 0.2);
        let a: Vec<f64> = t.iter().map(|t| 0.5 + 0.5 * (TAU * 9.33 * t + 2.9).cos()).collect();
        let b: Vec<f64> = t.iter().map(|t| 0.5 + 0.5 * (TAU * 9.33 * t + 2.9 - PI).cos()).collect();
        let pa = fit_single_sinusoid(&t, &a).unwrap().value("phase");
        let pb = fit_single_sinusoid(&t, &b).unwrap().value("phase");
        assert!((phase_difference(pa, pb).abs() - PI).abs() < 1e-6);
    }

    #[test]
    fn three_tones() {
        let t = grid(400, 2.0);
        let tones = [(1.7, 0.2, 0.3), (4.1, 0.3, -1.0), (5.8, 0.1, 2.0)];
        let y: Vec<f64> = t
            .iter()
            .map(|t| 0.4 + tones.iter().map(|(f, a, p)| a * (TAU * f * t + p).cos()).sum::<f64>())
            .collect();
        let fit = fit_sinusoid_sum(&t, &y, 3).unwrap();
        for (j, (f, a, p)) in tones.iter().enumerate() {
            let n = j + 1;
            assert!((fit.value(&format!("frequency_{n}")) - f).abs() < 1e-8);
            assert!((fit.value(&format!("amplitude_{n}")) - a).abs() < 1e-8);
            assert!(phase_difference(fit.value(&format!("phase_{n}")), *p).abs() < 1e-7);
        }
    }

    #[test]
    fn constant_trace() {
        let t = grid(50, 1.0);
        let y = vec![0.37; 50];
        let fit = fit_sinusoid_sum(&t, &y, 2).unwrap();
        assert!((fit.value("offset") - 0.37).abs() < 1e-12);
        assert!(fit.value("amplitude_1") < 1e-6 && fit.value("amplitude_2") < 1e-6);
        let single = fit_single_sinusoid(&t, &y).unwrap();
        assert!(!single.warnings.is_empty());
    }

    #[test]
    fn surplus_tone_has_small_amplitude() {
        let t = grid(200, 1.0);
        let y: Vec<f64> = t.iter().map(|t| 0.5 + 0.3 * (TAU * 7.0 * t).cos()).collect();
        let fit = fit_sinusoid_sum(&t, &y, 2).unwrap();
        let amps = [fit.value("amplitude_1"), fit.value("amplitude_2")];
        let small = amps.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(small < 1e-6, "{amps:?}");
    }
}
