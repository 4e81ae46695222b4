use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bandwidth mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("field is not real: mode {mode} violates conjugate symmetry by {defect:e}")]
    NotReal { mode: i64, defect: f64 },

    #[error("field does not have zero mean (|mode 0| = {0:e})")]
    NonZeroMean(f64),

    #[error("non-finite coefficient at mode {0}")]
    NonFinite(i64),

    #[error("exponential spectrum not resolved at bandwidth {bandwidth}: relative tail energy {tail:e}")]
    TailNotResolved { bandwidth: usize, tail: f64 },

    #[error("truncation {m} is too small for a potential of bandwidth {bandwidth}")]
    TruncationTooSmall { m: usize, bandwidth: usize },

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("phase of eigenvector {n} is undetermined (pairing modulus {modulus:e})")]
    DegeneratePhase { n: usize, modulus: f64 },

    #[error("gap {n} is negative ({gamma:e})")]
    NegativeGap { n: usize, gamma: f64 },

    #[error("mu_{n}: pairing {pairing} and product {product} disagree")]
    MuMismatch { n: usize, pairing: f64, product: f64 },

    #[error("quasi-linear coordinate {n}: direct and gauge formulas differ by {defect:e}")]
    Phi0Mismatch { n: usize, defect: f64 },

    #[error("decomposition residual {residual:e} at n = {n}")]
    DecompositionMismatch { n: usize, residual: f64 },

    #[error("index {n} lies outside the trusted range 1..={p}")]
    OutsideTrustedRange { n: usize, p: usize },

    #[error("(s, alpha) = ({s}, {alpha}) matches no smoothing case")]
    CaseOutOfRange { s: f64, alpha: f64 },

    #[error("one-gap parameter must satisfy 0 < |alpha| < 1, got |alpha| = {0}")]
    AlphaOutOfRange(f64),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("blow-up detected at t = {t}: L2 norm grew by a factor {growth:.3}")]
    BlowupDetected { t: f64, growth: f64 },

    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 configuration, 3 numerical failure, 4 instability.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ParamOutOfRange(_) | Error::AlphaOutOfRange(_) => 2,
            Error::CaseOutOfRange { .. } => 2,
            Error::BlowupDetected { .. } | Error::StepTooLarge { .. } => 4,
            _ => 3,
        }
    }
}
