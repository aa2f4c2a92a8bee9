use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("truncation mismatch: left has K = {left}, right has K = {right}")]
    TruncationMismatch { left: usize, right: usize },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown equation family `{0}`")]
    UnknownFamily(String),

    #[error("resonant mode k = {k}: |1 - exp(i psi T)| = {gap:e} is below the singularity guard")]
    Resonance { k: i64, gap: f64 },

    #[error("parameter box {index} is unbounded")]
    UnboundedBox { index: usize },

    #[error("hypotheses inconclusive: tail certificate needs k_scan_limit >= {needed}, got {limit}")]
    HypothesesInconclusive { needed: u64, limit: u64 },

    #[error("hypotheses violated at k = {k}")]
    HypothesesViolated { k: i64 },

    #[error("rejection sampling exhausted after {attempts} draws ({accepted} accepted)")]
    SamplingExhausted { attempts: usize, accepted: usize },

    #[error("period T = {period} is not certified by the excluded set")]
    UncertifiedPeriod { period: f64 },

    #[error("time step dt = {dt:e} exceeds the nonlinear CFL cap {cap:e}")]
    CflViolation { dt: f64, cap: f64 },

    #[error("instability at t = {time}: H^6 norm grew by a factor {growth:.3}")]
    Instability { time: f64, growth: f64 },

    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },

    #[error("excluded index pair (k = {k}, j = {j})")]
    ExcludedPair { k: i64, j: i64 },

    #[error("degenerate ladder: {0}")]
    DegenerateLadder(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
