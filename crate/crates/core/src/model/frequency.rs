use super::{defaults, ModeSystem, ShimPoint};
use crate::{Error, Result};

/// Frequency-domain counterpart of the Hessian, as used for spectrum fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyModel {
    /// kHz
    pub f_r: f64,
    /// kHz
    pub delta_f: f64,
    /// 1/mV
    pub c: f64,
    pub alpha: f64,
}

impl FrequencyModel {
    pub fn new(f_r: f64, delta_f: f64, c: f64, alpha: f64) -> Result<Self> {
        if !(delta_f > 0.0) || ![f_r, delta_f, c, alpha].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "frequency model needs finite parameters and delta_f > 0 (got {delta_f})"
            )));
        }
        Ok(Self { f_r, delta_f, c, alpha })
    }

    pub fn fitted() -> Self {
        Self {
            f_r: defaults::F_R_KHZ,
            delta_f: defaults::DELTA_F_KHZ,
            c: defaults::SHIM_GAIN_PER_MV,
            alpha: defaults::ALPHA,
        }
    }

    /// The eigenfrequency that stays linear in δV_A (mode without site A).
    pub fn linear_branch(&self, dv_a: f64) -> f64 {
        self.f_r + self.delta_f * self.alpha * self.c * dv_a
    }
}

/// Eigenvalues of F = f_R·I + Δf·(C + S(c·δV_A, 0)), ascending, kHz.
pub fn mode_frequencies(fm: &FrequencyModel, dv_a: f64) -> [f64; 3] {
    let ms = ModeSystem::compute(fm.alpha, ShimPoint::new(fm.c * dv_a, 0.0));
    ms.delta_k_values.map(|x| fm.f_r + fm.delta_f * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_pair_at_zero_voltage() {
        let f = mode_frequencies(&FrequencyModel::fitted(), 0.0);
        assert!((f[0] - 3876.60).abs() < 1e-9 && (f[1] - 3876.60).abs() < 1e-9);
        assert!((f[2] - (3876.60 + 3.0 * 3.299)).abs() < 1e-9);
        assert!((f[2] - 3886.50).abs() < 0.01);
    }

    #[test]
    fn linear_branch_slope() {
        let fm = FrequencyModel::fitted();
        let slope = fm.delta_f * fm.alpha * fm.c;
        assert!((slope - 1.52).abs() < 0.005, "{slope}");
        for dv in [-2.0, -0.7, 0.4, 1.9] {
            let f = mode_frequencies(&fm, dv);
            let lin = fm.linear_branch(dv);
            assert!(f.iter().any(|x| (x - lin).abs() < 1e-9), "{dv}: {f:?} vs {lin}");
        }
    }

    #[test]
    fn pair_sum_rule() {
        let fm = FrequencyModel::fitted();
        let dv = 1.0;
        let f = mode_frequencies(&fm, dv);
        let lin = fm.linear_branch(dv);
        let others: f64 = f.iter().sum::<f64>() - lin;
        let lhs = others - 2.0 * fm.f_r - fm.delta_f * fm.alpha * fm.c * dv;
        let rhs = 3.0 * fm.delta_f + fm.delta_f * fm.c * dv;
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_coupling() {
        assert!(FrequencyModel::new(3876.6, 0.0, -1.2, -0.38).is_err());
    }
}
