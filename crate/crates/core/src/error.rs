use thiserror::Error;

/// Errors produced by the reconstruction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin value: {0}")]
    InvalidSpin(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis is not a unit vector (norm {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("matrix is not hermitean (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate cone opening angle {theta}: all axes coincide")]
    DegenerateCone { theta: f64 },

    #[error("axes are coplanar: triple product {triple_product:.3e}")]
    Coplanar { triple_product: f64 },

    #[error("quorum is empty")]
    EmptyQuorum,

    #[error("table does not match quorum: {0}")]
    QuorumMismatch(String),

    #[error("measurement map is not injective: rank {rank}, null-space dimension {nullity}")]
    NotInjective { rank: usize, nullity: usize },

    #[error("inconsistent data: residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    InconsistentData { residual: f64, tolerance: f64 },

    #[error("no injective configuration among {candidates} candidates")]
    NoInjectiveConfiguration { candidates: usize },

    #[error("zero amplitude at m = {}", crate::spin::format_m(*two_m))]
    ZeroAmplitude { two_m: i32 },

    #[error("quorum is not a tripod: {0}")]
    NotTripod(String),

    #[error("no convergence: best residual {residual:.3e} after {seeds} seeds")]
    NoConvergence { residual: f64, seeds: usize },

    #[error("no candidate matches the third-axis data (best mismatch {best:.3e})")]
    NoMatch { best: f64 },

    #[error("{count} candidates match the third-axis data")]
    Ambiguous { count: usize },

    #[error("holdout axis lies in the quorum (angular distance {distance:.3e})")]
    HoldoutInQuorum { distance: f64 },

    #[error("wave function is not odd (max |psi(x) + psi(-x)| = {defect:.3e})")]
    NotOddParity { defect: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotInjective { .. } | Error::NoInjectiveConfiguration { .. } => 2,
            Error::InconsistentData { .. } | Error::NoMatch { .. } => 3,
            Error::ZeroAmplitude { .. } | Error::NoConvergence { .. } | Error::Ambiguous { .. } => 4,
            Error::Io(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
