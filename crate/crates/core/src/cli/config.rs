use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::experiment::SpectrumOptions;
use crate::model::ModelParams;
use crate::paths::{PathFamily, PathOptions};

/// Complete run configuration. Every section is optional in the JSON file;
/// missing keys take the fitted defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub paths: PathOptions,
    pub surfaces: SurfacesConfig,
    pub spectrum: SpectrumOptions,
    pub exchange: ExchangeConfig,
    pub berry: BerryConfig,
    pub sweep: SweepConfig,
    pub fit_spectrum: FitSpectrumConfig,
    pub fit_fringes: FitFringesConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            out_dir: PathBuf::from("out"),
            seed: 1,
            paths: PathOptions::default(),
            surfaces: SurfacesConfig::default(),
            spectrum: SpectrumOptions::default(),
            exchange: ExchangeConfig::default(),
            berry: BerryConfig::default(),
            sweep: SweepConfig::default(),
            fit_spectrum: FitSpectrumConfig::default(),
            fit_fringes: FitFringesConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfacesConfig {
    /// Points per axis.
    pub grid: usize,
    /// Half-width of the square shim grid.
    pub range: f64,
}

impl Default for SurfacesConfig {
    fn default() -> Self {
        Self { grid: 101, range: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExchangeConfig {
    pub dva_mv: Vec<f64>,
    pub t_max_ms: f64,
    pub points: usize,
    pub contrast: f64,
    /// 0 keeps the ideal trace.
    pub shots: u32,
    /// Tones fitted per trace.
    pub tones: usize,
}

impl Default for ExchangeConfig {
    fn default() -> Self {
        Self { dva_mv: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0], t_max_ms: 2.0, points: 401, contrast: 1.0, shots: 0, tones: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BerryConfig {
    pub family: PathFamily,
    #[serde(rename = "T_us")]
    pub t_us: f64,
    /// Waypoints per half loop.
    pub waypoints: usize,
    pub contrast: f64,
    pub shots: u32,
    /// Schedule JSON files with the waypoints of a custom pair.
    pub custom_enclosing: Option<PathBuf>,
    pub custom_non_enclosing: Option<PathBuf>,
}

impl Default for BerryConfig {
    fn default() -> Self {
        Self {
            family: PathFamily::Canonical,
            t_us: 780.0,
            waypoints: 80,
            contrast: 1.0,
            shots: 0,
            custom_enclosing: None,
            custom_non_enclosing: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub family: PathFamily,
    #[serde(rename = "T_us")]
    pub t_us: Vec<f64>,
    pub waypoints: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { family: PathFamily::Canonical, t_us: (1..=18).map(|i| 100.0 * i as f64).collect(), waypoints: 80 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct FitSpectrumConfig {
    /// Spectrum CSV (dVA_mV, df_kHz, response); generated from the model when absent.
    pub input: Option<PathBuf>,
    pub bootstrap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitFringesConfig {
    pub input: Option<PathBuf>,
    /// Second trace; its phase is subtracted from the first.
    pub reference: Option<PathBuf>,
    pub tones: usize,
    pub bootstrap: usize,
}

impl Default for FitFringesConfig {
    fn default() -> Self {
        Self { input: None, reference: None, tones: 1, bootstrap: 0 }
    }
}

/// Parse a config document; errors carry the offending field path.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(format!("config field '{path}': {}", e.into_inner()))
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(parse_config("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn nested_override() {
        let c = parse_config(r#"{"model": {"alpha": -0.5}, "berry": {"T_us": 1800, "family": "larger"}}"#).unwrap();
        assert_eq!(c.model.alpha, -0.5);
        assert_eq!(c.berry.t_us, 1800.0);
        assert_eq!(c.berry.family, PathFamily::Larger);
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_config(r#"{"model": {"alpha": "x"}}"#).unwrap_err();
        assert!(e.message.contains("model.alpha"), "{}", e.message);
        let e = parse_config(r#"{"berry": {"speed": 1}}"#).unwrap_err();
        assert!(e.message.contains("berry"), "{}", e.message);
        assert_eq!(e.exit_code(), 2);
        assert!(parse_config("{").is_err());
    }
}
