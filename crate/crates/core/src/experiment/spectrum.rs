use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analysis::{fit_gaussian_peak, PeakCenters};
use crate::model::{mode_frequencies, FrequencyModel};
use crate::{Error, Result};

/// Normalized response on a (δV_A, δf) grid; δf is relative to f_R.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMap {
    pub dv_a: Vec<f64>,
    pub df: Vec<f64>,
    /// `response[i][j]` at (dv_a[i], df[j]), in [0, 1].
    pub response: Vec<Vec<f64>>,
}

impl SpectrumMap {
    /// CSV with columns dVA_mV, df_kHz, response (δV_A outer, δf inner).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["dVA_mV", "df_kHz", "response"])?;
        for (i, dv) in self.dv_a.iter().enumerate() {
            for (j, df) in self.df.iter().enumerate() {
                out.write_record([format!("{dv:.6}"), format!("{df:.6}"), format!("{:.9}", self.response[i][j])])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let num = |c: usize| -> Result<f64> {
                rec.get(c)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("row {}: column {} is not a number", line + 2, c + 1)))
            };
            rows.push((num(0)?, num(1)?, num(2)?));
        }
        let mut dv: Vec<f64> = rows.iter().map(|r| r.0).collect();
        dv.dedup();
        if dv.is_empty() || !rows.len().is_multiple_of(dv.len()) {
            return Err(Error::InvalidInput("spectrum CSV is not a full rectangular grid".into()));
        }
        let n_df = rows.len() / dv.len();
        let df: Vec<f64> = rows[..n_df].iter().map(|r| r.1).collect();
        let response = rows.chunks(n_df).map(|c| c.iter().map(|r| r.2).collect()).collect();
        Ok(Self { dv_a: dv, df, response })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumOptions {
    pub dv_min_mv: f64,
    pub dv_max_mv: f64,
    pub dv_step_mv: f64,
    pub df_min_khz: f64,
    pub df_max_khz: f64,
    /// 4/11 kHz puts 12 samples across ±2 kHz.
    pub df_step_khz: f64,
    /// Gaussian σ of each line, kHz.
    pub linewidth_khz: f64,
    /// Additive noise σ relative to a single line's peak.
    pub noise: f64,
    /// Samples per Gaussian fit window.
    pub window_points: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            dv_min_mv: -2.0,
            dv_max_mv: 2.0,
            dv_step_mv: 0.1,
            df_min_khz: -12.0,
            df_max_khz: 16.0,
            df_step_khz: 4.0 / 11.0,
            linewidth_khz: 0.5,
            noise: 0.05,
            window_points: 12,
        }
    }
}

impl SpectrumOptions {
    fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0) || !(hi >= lo) {
            return Err(Error::InvalidInput(format!("bad grid [{lo}, {hi}] step {step}")));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| lo + step * i as f64).collect())
    }

    pub fn dv_grid(&self) -> Result<Vec<f64>> {
        Self::grid(self.dv_min_mv, self.dv_max_mv, self.dv_step_mv)
    }

    pub fn df_grid(&self) -> Result<Vec<f64>> {
        Self::grid(self.df_min_khz, self.df_max_khz, self.df_step_khz)
    }
}

/// Sum of three unit Gaussian lines at the mode frequencies plus additive
/// Gaussian noise, min-max normalized to [0, 1].
pub fn synthetic_spectrum(
    fm: &FrequencyModel,
    dv_a: &[f64],
    df: &[f64],
    linewidth: f64,
    noise: f64,
    seed: u64,
) -> Result<SpectrumMap> {
    if !(linewidth > 0.0) {
        return Err(Error::InvalidInput(format!("linewidth must be positive, got {linewidth}")));
    }
    if !(noise >= 0.0) {
        return Err(Error::InvalidInput(format!("noise must be non-negative, got {noise}")));
    }
    if dv_a.is_empty() || df.is_empty() {
        return Err(Error::InvalidInput("spectrum grid is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid normal");
    let mut response: Vec<Vec<f64>> = dv_a
        .iter()
        .map(|&dv| {
            let centers = mode_frequencies(fm, dv).map(|f| f - fm.f_r);
            df.iter()
                .map(|&x| {
                    let line: f64 = centers.iter().map(|c| (-0.5 * ((x - c) / linewidth).powi(2)).exp()).sum();
                    line + if noise > 0.0 { dist.sample(&mut rng) } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let (lo, hi) = response.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = if hi > lo { hi - lo } else { 1.0 };
    response.iter_mut().flatten().for_each(|v| *v = (*v - lo) / range);
    Ok(SpectrumMap { dv_a: dv_a.to_vec(), df: df.to_vec(), response })
}

/// `points` consecutive samples of one δV_A column centered on the largest
/// response within ±`search` kHz of `guess`.
pub fn peak_window(map: &SpectrumMap, column: usize, guess: f64, search: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    let n = map.df.len();
    if points < 5 || points > n {
        return Err(Error::InvalidInput(format!("window of {points} points does not fit a {n}-point column")));
    }
    let col = &map.response[column];
    let nearest = (0..n).min_by(|&a, &b| (map.df[a] - guess).abs().total_cmp(&(map.df[b] - guess).abs())).unwrap();
    let half = points / 2;
    let peak = (0..n)
        .filter(|&j| j == nearest || (map.df[j] - guess).abs() <= search)
        .max_by(|&a, &b| col[a].total_cmp(&col[b]))
        .unwrap();
    let start = peak.saturating_sub(half - usize::from(points.is_multiple_of(2))).min(n - points);
    Ok((start..start + points).map(|j| (map.df[j], col[j])).collect())
}

/// Gaussian-fitted peak centers per δV_A column, guided by the model curves of
/// `guide`. Centers are returned as absolute frequencies.
///
/// A column is dropped when two curves come within two linewidths, when a
/// neighbouring line sits inside a fit window (half the window span plus one
/// linewidth), or when any fit fails.
pub fn extract_peak_centers(
    map: &SpectrumMap,
    guide: &FrequencyModel,
    linewidth: f64,
    window_points: usize,
) -> Result<Vec<PeakCenters>> {
    if map.df.len() < 2 {
        return Err(Error::InvalidInput("spectrum needs at least two δf samples".into()));
    }
    let step = (map.df[map.df.len() - 1] - map.df[0]) / (map.df.len() - 1) as f64;
    let half_span = 0.5 * (window_points.saturating_sub(1)) as f64 * step;
    let min_separation = (2.0 * linewidth).max(half_span + linewidth);
    let mut out = Vec::new();
    'columns: for (i, &dv) in map.dv_a.iter().enumerate() {
        let curves = mode_frequencies(guide, dv).map(|f| f - guide.f_r);
        if curves.windows(2).any(|w| (w[1] - w[0]).abs() < min_separation) {
            continue;
        }
        let mut centers = [0.0; 3];
        for (k, &c) in curves.iter().enumerate() {
            let win = peak_window(map, i, c, linewidth, window_points)?;
            match fit_gaussian_peak(&win) {
                Ok(fit) if fit.converged => centers[k] = fit.value("center") + guide.f_r,
                _ => continue 'columns,
            }
        }
        centers.sort_by(f64::total_cmp);
        out.push(PeakCenters { dv_a: dv, centers });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(noise: f64, linewidth: f64) -> SpectrumMap {
        let o = SpectrumOptions::default();
        synthetic_spectrum(&FrequencyModel::fitted(), &o.dv_grid().unwrap(), &o.df_grid().unwrap(), linewidth, noise, 7)
            .unwrap()
    }

    #[test]
    fn grids() {
        let o = SpectrumOptions::default();
        assert_eq!(o.dv_grid().unwrap().len(), 41);
        let df = o.df_grid().unwrap();
        assert!((df[11] - df[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_lies_on_a_model_curve() {
        let m = map(0.0, 0.5);
        let fm = FrequencyModel::fitted();
        let i = m.dv_a.iter().position(|v| (v + 2.0).abs() < 1e-12).unwrap();
        let j = (0..m.df.len()).max_by(|&a, &b| m.response[i][a].total_cmp(&m.response[i][b])).unwrap();
        let curves = mode_frequencies(&fm, -2.0).map(|f| f - fm.f_r);
        assert!(curves.iter().any(|c| (c - m.df[j]).abs() <= 0.25));
        assert!(m.response.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn degenerate_column_has_one_merged_peak() {
        let m = map(0.0, 0.5);
        let i = m.dv_a.iter().position(|v| v.abs() < 1e-12).unwrap();
        let col = &m.response[i];
        let j = (0..m.df.len()).max_by(|&a, &b| col[a].total_cmp(&col[b])).unwrap();
        assert!(m.df[j].abs() < 0.25);
    }

    #[test]
    fn noiseless_pipeline_recovers_centers() {
        let m = map(0.0, 0.5);
        let fm = FrequencyModel::fitted();
        let centers = extract_peak_centers(&m, &fm, 0.5, 12).unwrap();
        assert!(centers.len() >= 20, "{}", centers.len());
        for pc in &centers {
            let want = mode_frequencies(&fm, pc.dv_a);
            for (got, want) in pc.centers.iter().zip(want) {
                assert!((got - want).abs() < 0.05, "{pc:?}");
            }
        }
    }

    #[test]
    fn width_scales_with_linewidth() {
        let fm = FrequencyModel::fitted();
        let dv = [-2.0];
        let df: Vec<f64> = (0..200).map(|i| -12.0 + 0.14 * i as f64).collect();
        let widths: Vec<f64> = [0.4, 0.8]
            .iter()
            .map(|&lw| {
                let m = synthetic_spectrum(&fm, &dv, &df, lw, 0.0, 0).unwrap();
                let c = mode_frequencies(&fm, -2.0)[0] - fm.f_r;
                let win = peak_window(&m, 0, c, lw, 25).unwrap();
                fit_gaussian_peak(&win).unwrap().value("width")
            })
            .collect();
        assert!((widths[1] / widths[0] - 2.0).abs() < 0.05, "{widths:?}");
    }

    #[test]
    fn csv_round_trip() {
        let fm = FrequencyModel::fitted();
        let m = synthetic_spectrum(&fm, &[-1.0, 0.0, 1.0], &[-1.0, 0.0, 2.0, 3.0], 0.5, 0.0, 0).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = SpectrumMap::read_csv(&buf[..]).unwrap();
        assert_eq!(back.dv_a, m.dv_a);
        assert_eq!(back.df, m.df);
        for (a, b) in back.response.iter().flatten().zip(m.response.iter().flatten()) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
