//! Simulated protocols: exchange interferograms, Berry-phase fringe pairs,
//! adiabaticity sweeps, synthetic spectra and shot noise.
//!
//! Readout is idealized: the phonon is injected into site C and the bright
//! probability is 1 − P_return(C), optionally scaled by a global contrast.

mod interference;
mod shots;
mod spectrum;
mod trace;

pub use interference::{
    adiabaticity_sweep, default_fringe_delays, exchange_trace, fringe_tone, run_berry, run_interference, BerryRun,
    SweepPoint,
};
pub use shots::sample_shots;
pub use spectrum::{extract_peak_centers, peak_window, synthetic_spectrum, SpectrumMap, SpectrumOptions};
pub use trace::{FringeTrace, TraceMetadata};
