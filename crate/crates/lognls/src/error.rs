//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two (need N = 2^k, N >= 8)")]
    NonPowerOfTwo(usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("potential family {family} incompatible with {geometry} geometry")]
    GeometryMismatch { family: String, geometry: String },

    #[error("state under-resolved: top-octave spectral mass fraction {0:.3e} exceeds 1e-6")]
    NyquistGuard(f64),

    #[error("boundary-shell mass {0:.3e} exceeds 1e-8; enlarge the box")]
    BoundaryMass(f64),

    #[error("contraction condition violated: s*|D^2 phi| = {0:.3} >= {1}")]
    ContractionViolation(f64, f64),

    #[error("characteristic inversion did not converge within {0} iterations")]
    InversionStall(usize),

    #[error("phase not synthesizable at depth <= {depth}: {reason}")]
    DepthExceeded { depth: usize, reason: String },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
