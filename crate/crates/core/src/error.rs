use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain length {b} is not an integer multiple of spacing {h}")]
    NonIntegralRatio { b: f64, h: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("cannot read field from {path}: {reason}")]
    FileError { path: String, reason: String },

    #[error("norm order must be at least 1, got {0}")]
    InvalidOrder(f64),

    #[error("value {value} at node {index} is too negative for fractional power {alpha}")]
    NegativePower { index: usize, value: f64, alpha: f64 },

    #[error("zero pivot at row {row} (|pivot| = {pivot:e})")]
    ZeroPivot { row: usize, pivot: f64 },

    #[error("blow-up detected at t = {t}: max |u| = {max_u}")]
    BlowupDetected { t: f64, max_u: f64 },

    #[error("explicit step {tau_ref} exceeds stability bound {bound}")]
    CflViolation { tau_ref: f64, bound: f64 },

    #[error("initial masses differ: {mass_u} vs {mass_v}")]
    MassMismatch { mass_u: f64, mass_v: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("mass series is empty")]
    EmptySeries,

    #[error("runs cannot be compared: {0}")]
    MisalignedRuns(String),

    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },

    #[error("invalid configuration: {0}")]
    ValidationError(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
