use std::collections::BTreeMap;

use serde::Serialize;

use super::BootstrapReport;

/// Named parameter estimates with 1σ uncertainties.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct FitResult {
    pub parameters: BTreeMap<String, f64>,
    pub uncertainties: BTreeMap<String, f64>,
    /// √RSS at the solution.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn insert(&mut self, name: &str, value: f64, sigma: f64) {
        self.parameters.insert(name.to_string(), value);
        self.uncertainties.insert(name.to_string(), if sigma.is_finite() { sigma.abs() } else { f64::INFINITY });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }

    /// Value of a parameter the fitter is known to produce.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("fit has no parameter '{name}'"))
    }

    pub fn sigma(&self, name: &str) -> f64 {
        self.uncertainties.get(name).copied().unwrap_or(f64::NAN)
    }
}

/// JSON fit report: point estimates plus optional bootstrap intervals.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub parameters: BTreeMap<String, f64>,
    pub uncertainties: BTreeMap<String, f64>,
    pub ci68: BTreeMap<String, [f64; 2]>,
    pub ci95: BTreeMap<String, [f64; 2]>,
    pub converged: bool,
    pub residual: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FitReport {
    pub fn new(fit: &FitResult, boot: Option<&BootstrapReport>) -> Self {
        let mut warnings = fit.warnings.clone();
        let (mut ci68, mut ci95) = (BTreeMap::new(), BTreeMap::new());
        if let Some(b) = boot {
            for (name, iv) in &b.intervals {
                ci68.insert(name.clone(), iv.ci68);
                ci95.insert(name.clone(), iv.ci95);
            }
            warnings.extend(b.warnings.iter().cloned());
        }
        Self {
            parameters: fit.parameters.clone(),
            uncertainties: fit.uncertainties.clone(),
            ci68,
            ci95,
            converged: fit.converged,
            residual: fit.residual,
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
