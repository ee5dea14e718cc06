use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("velocity model rejected: {0}")]
    Model(String),

    /// The inverse kernel map cannot be evaluated because `exp(-dx/eta)`
    /// rounds to one.
    #[error("ill-conditioned reconstruction: dx/eta = {ratio:e} is below working precision")]
    IllConditioned { ratio: f64 },

    /// The sign of the velocity disagrees with the kernel orientation.
    #[error("orientation mismatch: V(W) = {speed} at interface {interface} in {orientation} mode")]
    ModeViolation {
        interface: usize,
        speed: f64,
        orientation: &'static str,
    },

    #[error("numerical blowup at step {step} (t = {time})")]
    Blowup { step: usize, time: f64 },

    /// A failure inside one η run of an experiment.
    #[error("run with eta = {eta} failed: {source}")]
    Run {
        eta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("snapshot schedules differ: {0}")]
    MismatchedSchedules(String),

    #[error("insufficient snapshot density: {0}")]
    InsufficientSnapshots(String),

    #[error("test function is negative ({value}) at t = {t}, x = {x}")]
    NegativeTestFunction { t: f64, x: f64, value: f64 },

    /// Configuration errors carry the offending key path, e.g. `eta_list[2]`.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("missing output files: {}", format_paths(.0))]
    MissingFiles(Vec<PathBuf>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_blowup(&self) -> bool {
        match self {
            Error::Blowup { .. } => true,
            Error::Run { source, .. } => source.is_blowup(),
            _ => false,
        }
    }
}

fn format_paths(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
