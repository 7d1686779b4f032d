use thiserror::Error;

/// Errors produced by the simulation and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("{what} supports n <= {limit}, got {n}")]
    DimensionLimit {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("mode count {m} outside supported range [{min}, {max}]")]
    ModeCount { m: usize, min: usize, max: usize },

    #[error("matrix is not unitary: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("malformed mesh spec: {0}")]
    MalformedMesh(String),

    #[error("efficiency {value} outside (0, 1]")]
    EfficiencyRange { value: f64 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("photon count mismatch: {0}")]
    PhotonCount(String),

    #[error("distributions have different supports")]
    SupportMismatch,

    #[error("distribution is not normalized")]
    NotNormalized,

    #[error("event {0} outside distribution support")]
    EventOutsideSupport(String),

    #[error("inconsistent loss split: {0}")]
    InconsistentLoss(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
