use thiserror::Error;

/// Errors raised by the library. Mathematical violations are reported as
/// data (see the report structs), never through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty set not allowed")]
    EmptySet,

    #[error("dimension {dim} out of supported range {min}..={max}")]
    DimensionOutOfRange { dim: usize, min: usize, max: usize },

    #[error("point index {index} does not fit in dimension {dim}")]
    PointOutOfRange { index: u64, dim: usize },

    #[error("set is not monotone: {point:0width$b} is a member but raising coordinate {coord} leaves the set", width = *dim)]
    NotMonotone { point: u64, coord: usize, dim: usize },

    #[error("cannot split dimension 1")]
    SplitDimensionOne,

    #[error("enumeration cap: dimension {0} exceeds 5")]
    EnumerationCap(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("degenerate densities: a0 = a1 = 0")]
    DegenerateDensities,

    #[error("no spectral gap for singleton")]
    Singleton,

    #[error("induced subgraph is disconnected")]
    Disconnected,

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("spectral gap mismatch: Laplacian route {laplacian}, direct route {direct}")]
    GapMismatch { laplacian: f64, direct: f64 },

    #[error("laziness required for this bound (theta = {0} < 1/2)")]
    LazinessRequired(f64),

    #[error("mixing did not reach epsilon within {0} steps")]
    MixingCap(u64),

    #[error("operation requires a threshold family oracle")]
    NotThreshold,

    #[error("start point is not a member of the set")]
    StartNotInSet,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Errors that can only arise from an inconsistent computation rather
    /// than bad input.
    pub fn is_violation(&self) -> bool {
        matches!(self, Self::GapMismatch { .. } | Self::Disconnected)
    }
}
