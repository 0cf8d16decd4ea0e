use thiserror::Error;

/// Errors raised anywhere in the clustering pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("duplicate observation for curve `{curve}` at time {time}")]
    DuplicateObservation { curve: String, time: f64 },

    #[error("non-finite value for curve `{curve}` at time {time}")]
    NonFiniteValue { curve: String, time: f64 },

    #[error("time {time} of curve `{curve}` lies outside the domain [0, 1]")]
    OutOfDomain { curve: String, time: f64 },

    #[error("grids differ; interpolate one curve onto the other's grid first")]
    GridMismatch,

    #[error("point {0} lies outside the interpolation span (no extrapolation)")]
    Extrapolation(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("MADD needs n >= 3, got n = {0}")]
    TooFewRows(usize),

    #[error("invalid population spec: {0}")]
    InvalidPopulation(String),

    #[error("degenerate dissimilarity: total dispersion is zero")]
    DegenerateDissimilarity,

    #[error("cluster count K = {k} out of range for n = {n} (need 2 <= K <= n - 1)")]
    ClusterCountOutOfRange { k: usize, n: usize },

    #[error("cluster too small for covariance (cluster {cluster} has {size} member)")]
    ClusterTooSmall { cluster: usize, size: usize },

    #[error("degenerate covariance: no positive eigenvalue")]
    DegenerateCovariance,

    #[error("bandwidth too small: empty kernel window at t = {0}")]
    BandwidthTooSmall(f64),

    #[error("domain not covered: no observation within one grid step of t = {0}")]
    DomainNotCovered(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("all {count} ensemble combinations failed: {details}")]
    AllCombinationsFailed { count: usize, details: String },

    #[error("unknown model id {0} (expected 1..=10)")]
    UnknownModel(usize),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Whether the error stems from numerical degeneracy rather than bad input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateDissimilarity
                | Error::DegenerateCovariance
                | Error::AllCombinationsFailed { .. }
                | Error::ClusterTooSmall { .. }
                | Error::BandwidthTooSmall(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
