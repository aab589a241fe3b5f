use thiserror::Error;

/// Errors raised across the simulator and fitting pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("unstable configuration: total curvature {0:e} N/m is not positive")]
    UnstableConfiguration(f64),
    #[error("unstable mode: total curvature {0:e} N/m is not positive")]
    UnstableMode(f64),
    #[error("displacement {displacement:e} m exceeds d0/10 = {limit:e} m")]
    DisplacementTooLarge { displacement: f64, limit: f64 },
    #[error("near collision: pair distance {0:e} m is below d0/100")]
    NearCollision(f64),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("norm drift {drift:e} exceeds 1e-6; reduce dt below {dt} ms")]
    StepSize { drift: f64, dt: f64 },
    #[error("singular parameter: alpha = {0} (must differ from +1 and -1)")]
    SingularParameter(f64),
    #[error("no contour: {0}")]
    NoContour(String),
    #[error("contour geometry: {0}")]
    ContourGeometry(String),
    #[error("degenerate path: waypoint ({0}, {1}) lies within 1e-3 of the conical intersection")]
    DegeneratePath(f64, f64),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("phase undefined: band {band} is degenerate at ({s_a}, {s_b})")]
    PhaseUndefined { band: usize, s_a: f64, s_b: f64 },
    #[error("refine path: overlap {overlap} between successive waypoints {index} and {next} is below 0.9")]
    RefinePath { overlap: f64, index: usize, next: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("branch assignment ambiguous: {0}")]
    BranchAssignment(String),
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
