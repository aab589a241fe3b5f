//! Least-squares fitters, model-parameter extraction and bootstrap intervals.

mod bootstrap;
mod extract;
mod fit;
mod gaussian;
mod lm;
mod sinusoid;

pub use bootstrap::{bootstrap_ci, BootstrapReport, Interval};
pub use extract::{extract_model_params, PeakCenters};
pub use fit::{FitReport, FitResult};
pub use gaussian::{fit_gaussian_peak, gaussian};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome, Residuals};
pub use sinusoid::{fit_single_sinusoid, fit_sinusoid_sum, periodogram, phase_difference, wrap_phase};
