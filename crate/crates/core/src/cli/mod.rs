//! Command-line front end: configuration, dispatch and artifact writing.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{
    load_config, parse_config, BerryConfig, ExchangeConfig, FitFringesConfig, FitSpectrumConfig, RunConfig,
    SurfacesConfig, SweepConfig,
};

use crate::paths::{PathFamily, SpeedProfile};

#[derive(Debug, Parser)]
#[command(name = "triphonon", version, about = "Three-site phonon simulator: mode surfaces, spectra, exchange, Berry-phase interferometry and fits")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files [default: out, or $TRIPHONON_OUT_DIR].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Base seed for all random sampling [default: 1].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue surfaces δk_j/Δk over a square shim grid.
    Surfaces(SurfacesArgs),
    /// Synthetic mode spectrum versus electrode offset δV_A.
    Spectrum(SpectrumArgs),
    /// Single-phonon exchange traces at fixed shims, with tone fits.
    Exchange(ExchangeArgs),
    /// Berry-phase fringe pair for one path family.
    Berry(BerryArgs),
    /// Fringe phase difference versus traversal time.
    Sweep(SweepArgs),
    /// Extract f_R, Δf, c and α from a spectrum.
    FitSpectrum(FitSpectrumArgs),
    /// Fit sinusoids to a fringe trace (and its phase against a reference).
    FitFringes(FitFringesArgs),
}

#[derive(Debug, Args)]
pub struct SurfacesArgs {
    /// Points per axis [default: 101].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Grid half-width in shim units [default: 3].
    #[arg(long)]
    pub range: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Line σ in kHz [default: 0.5].
    #[arg(long)]
    pub linewidth: Option<f64>,
    /// Additive noise relative to a line's peak [default: 0.05].
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExchangeArgs {
    /// Electrode offsets in mV, comma separated [default: -2,-1,-0.5,0,0.5,1,2].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub dva_mv: Option<Vec<f64>>,
    /// Longest delay in ms [default: 2].
    #[arg(long)]
    pub t_max_ms: Option<f64>,
    /// Delays per trace [default: 401].
    #[arg(long)]
    pub points: Option<usize>,
    /// Global readout contrast in [0, 1] [default: 1].
    #[arg(long)]
    pub contrast: Option<f64>,
    /// Shots per point; 0 keeps ideal probabilities [default: 0].
    #[arg(long)]
    pub shots: Option<u32>,
}

#[derive(Debug, Args)]
pub struct BerryArgs {
    /// canonical, larger, smaller, wavy, multi-loop or custom [default: canonical].
    #[arg(long)]
    pub family: Option<PathFamily>,
    /// Traversal time of each loop in µs [default: 780].
    #[arg(long = "T-us")]
    pub t_us: Option<f64>,
    /// Waypoints per half loop [default: 80].
    #[arg(long)]
    pub waypoints: Option<usize>,
    /// arc-length or locally-adiabatic [default: locally-adiabatic].
    #[arg(long, value_parser = parse_profile)]
    pub profile: Option<SpeedProfile>,
    /// Global readout contrast [default: 1].
    #[arg(long)]
    pub contrast: Option<f64>,
    /// Shots per fringe point; 0 keeps ideal probabilities [default: 0].
    #[arg(long)]
    pub shots: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Path family [default: canonical].
    #[arg(long)]
    pub family: Option<PathFamily>,
    /// Durations in µs as start:stop:step or a comma list [default: 100:1800:100].
    #[arg(long = "T-us")]
    pub t_us: Option<String>,
    /// Waypoints per half loop [default: 80].
    #[arg(long)]
    pub waypoints: Option<usize>,
    /// arc-length or locally-adiabatic [default: locally-adiabatic].
    #[arg(long, value_parser = parse_profile)]
    pub profile: Option<SpeedProfile>,
}

#[derive(Debug, Args)]
pub struct FitSpectrumArgs {
    /// Spectrum CSV; a synthetic one is generated when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Bootstrap trials (0 disables, otherwise at least 100) [default: 0].
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitFringesArgs {
    /// Trace CSV with delay_ms and p_bright columns.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Reference trace; reports the single-tone phase difference input − reference.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Tones to fit, 1 to 3 [default: 1].
    #[arg(long)]
    pub tones: Option<usize>,
    /// Bootstrap trials (0 disables, otherwise at least 100) [default: 0].
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

fn parse_profile(s: &str) -> Result<SpeedProfile, String> {
    match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
        "arc_length" => Ok(SpeedProfile::ArcLength),
        "locally_adiabatic" => Ok(SpeedProfile::LocallyAdiabatic),
        _ => Err(format!("unknown speed profile '{s}'")),
    }
}

/// Parse "a:b:step" (inclusive) or "a,b,c".
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("cannot parse list '{s}'"));
    let nums = |sep: char| -> Result<Vec<f64>, CliError> {
        s.split(sep).map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect()
    };
    if s.contains(':') {
        let v = nums(':')?;
        let (lo, hi, step) = match v.as_slice() {
            [lo, hi, step] => (*lo, *hi, *step),
            [lo, hi] => (*lo, *hi, 1.0),
            _ => return Err(bad()),
        };
        if !(step > 0.0) || hi < lo {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| lo + step * i as f64).collect())
    } else {
        nums(',')
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Config,
    Numerical,
    Io,
}

/// A failure with its process exit status.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Config, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Numerical, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io => 4,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind, "message": self.message, "exit_code": self.exit_code() }).to_string()
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error as E;
        let kind = match &e {
            E::InvalidGeometry(_)
            | E::InvalidInput(_)
            | E::InvalidSchedule(_)
            | E::InvalidPath(_)
            | E::SingularParameter(_)
            | E::NotNormalized(_) => ErrorKind::Config,
            E::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Numerical,
        };
        Self { kind, message: e.to_string() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

/// Writes each artifact to a temporary file in the output directory and
/// renames it into place.
pub struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError {
            kind: ErrorKind::Io,
            message: format!("cannot create output directory {}: {e}", dir.display()),
        })?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, fill: impl FnOnce(&mut dyn Write) -> crate::Result<()>) -> Result<PathBuf, CliError> {
        let io = |e: std::io::Error| CliError { kind: ErrorKind::Io, message: format!("writing {name}: {e}") };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io)?;
        {
            let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
            fill(&mut buf)?;
            buf.flush().map_err(io)?;
        }
        let path = self.dir.join(name);
        tmp.persist(&path).map_err(|e| io(e.error))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        self.write(name, |w| Ok(w.write_all(text.as_bytes())?))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Apply global flags and the optional config file.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if cli.config.is_none() {
        if let Some(dir) = std::env::var_os("TRIPHONON_OUT_DIR") {
            cfg.out_dir = PathBuf::from(dir);
        }
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Run one command; returns the one-line summary.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let mut cfg = resolve_config(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        // ignore "already initialised" when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    commands::dispatch(&cli.command, &mut cfg)
}
