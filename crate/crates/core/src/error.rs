use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("{name} = {value} is out of range: {reason}")]
    OutOfRange { name: &'static str, value: f64, reason: String },

    #[error("Richardson extrapolation did not converge (error estimate {estimate:.3e})")]
    Extrapolation { estimate: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("quadrature did not converge (residual estimate {residual:.3e})")]
    Quadrature { residual: f64 },

    #[error("cutoff order {order} is not below the expansion order {n}")]
    OrderViolation { order: f64, n: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("energy window [{lo}, {hi}] contains no eigenvalues")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("fit needs at least {needed} points above the floor, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("fit rejected: residual RMS {rms:.3} exceeds {limit}")]
    FitRejected { rms: f64, limit: f64 },

    #[error("degenerate ladder: {0}")]
    DegenerateLadder(String),

    #[error("boundary contamination at t = {time} (boundary mass {mass:.3e})")]
    BoundaryContamination { time: f64, mass: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),

    #[error("state norm {norm:.3e} after filtering is not above {limit:e}")]
    VanishingNorm { norm: f64, limit: f64 },

    #[error("window has {got} samples, need at least {needed}")]
    WindowTooShort { needed: usize, got: usize },

    #[error("integral factor diverges: {0}")]
    DivergentIntegral(String),

    #[error("imaginary broadening {eta} below the spectral-spacing floor {floor:.3e}")]
    BelowSpacingFloor { eta: f64, floor: f64 },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}
