use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("azimuth {0} rad outside the open interval (-pi/2, pi/2)")]
    AngleDomain(f64),

    #[error("invalid array configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("operation requires at least one target")]
    EmptyScene,

    #[error("noise power must be strictly positive, got {0}")]
    NoisePower(f64),

    #[error("parameters are not identifiable (FIM condition estimate {condition:.3e})")]
    Identifiability { condition: f64 },

    #[error("code/steering combination has zero energy at azimuth {theta} rad")]
    SingularSteering { theta: f64 },

    #[error("index {index} out of range for {len} estimates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
