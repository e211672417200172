//! Error types shared across the crate.

use thiserror::Error;

use crate::fourier::MultiIndex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("truncation mismatch: {0}")]
    TruncationMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("problem validation failed: {0}")]
    ValidationFailed(String),

    #[error("resonant mode k = {k}: |k.omega| = {value:.3e}")]
    ResonantMode { k: MultiIndex, value: f64 },

    #[error("input has non-zero average (|average| = {0:.3e})")]
    NonZeroAverage(f64),

    #[error("twisted cohomology requires beta != 0")]
    ZeroBeta,

    #[error(
        "leading term lies in an excluded cone: |Re(l a^(l-1))| = {margin:.3e} \
         ({relative:.3e} relative to |l a^(l-1)|)"
    )]
    ConeViolation { margin: f64, relative: f64 },

    #[error("spectrum of the linearization is too close to the imaginary axis (margin {0:.3e})")]
    SpectrumOnAxis(f64),

    #[error("oscillator condition delta^2 + 2 l a^(l-1) >= 0 violated (value {0:.3e})")]
    OscillatorConditionViolated(f64),

    #[error("no real branch: {0}")]
    NoRealBranch(String),

    #[error("Newton iteration for the leading term diverged: {0}")]
    NewtonDiverged(String),

    #[error("fixed-point iteration failed to contract after {halvings} ball halvings")]
    NoContraction { halvings: usize },

    #[error("fixed-point iteration exceeded {0} iterations")]
    MaxIterExceeded(usize),

    #[error("degenerate linear forcing coefficient: |avg(g1)| = {0:.3e}")]
    G1Degenerate(f64),

    #[error("root tracking ambiguous: {0}")]
    RootTrackingAmbiguous(String),

    #[error("integrator step too large: local error estimate {0:.3e}")]
    StepTooLarge(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
