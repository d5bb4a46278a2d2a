use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site index {index} outside 1..={len}")]
    SiteOutOfRange { index: usize, len: usize },

    #[error("invalid chain geometry: {0}")]
    Geometry(String),

    #[error("invalid profile parameter: {0}")]
    Profile(String),

    #[error("static front (v = 0) has no effective quench time")]
    StaticFront,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("matrix is not antisymmetric (max |M + M^T| = {0:e})")]
    NotAntisymmetric(f64),

    #[error("Pfaffian of odd-dimensional ({0}) matrix")]
    OddDimension(usize),

    #[error("Bogoliubov unitarity violated: defect {defect:e} exceeds {tolerance:e}")]
    NonUnitary { defect: f64, tolerance: f64 },

    #[error("reference site {n_ref} is not in the ferromagnetic region (epsilon = {epsilon})")]
    ReferenceNotOrdered { n_ref: usize, epsilon: f64 },

    #[error("unitarity drift {defect:e} exceeded tolerance {tolerance:e} at t = {t} (reduce dt)")]
    Drift { defect: f64, tolerance: f64, t: f64 },

    #[error("front velocity v = {0} is at or above 2: no co-moving stationary modes")]
    SuperThreshold(f64),

    #[error("invalid integrator setting: {0}")]
    Integrator(String),

    #[error("{0}")]
    Invalid(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("grid point {index} ({label}): {source}")]
    GridPoint {
        index: usize,
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
