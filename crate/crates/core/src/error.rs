use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single failed density-matrix invariant together with its measured size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityViolation {
    /// Largest entry of `|M - M^dagger|`.
    NotHermitian(f64),
    /// Most negative eigenvalue.
    NotPsd(f64),
    /// `|trace - 1|`.
    TraceNotOne(f64),
}

impl fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotHermitian(d) => write!(f, "NotHermitian(max deviation {d:.3e})"),
            Self::NotPsd(l) => write!(f, "NotPSD(min eigenvalue {l:.3e})"),
            Self::TraceNotOne(d) => write!(f, "TraceNotOne({d:.3e})"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: String, found: String },
    #[error("invalid density matrix: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
    InvalidDensity(Vec<DensityViolation>),
    #[error("ensemble weight {index} is not strictly positive ({weight})")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("ensemble weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },
    #[error("pure state {index} has norm {norm}, expected 1")]
    NotNormalized { index: usize, norm: f64 },
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("rank {rank} is outside 1..={max}")]
    InvalidRank { rank: usize, max: usize },
    #[error("numerical rank of the sampled state is {found}, expected {expected}")]
    RankDeficientSample { expected: usize, found: usize },
    #[error("parameter vector has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("parameter vector is zero")]
    ZeroVector,
    #[error("level {level} is out of range (must be < {bound})")]
    LevelOutOfRange { level: usize, bound: usize },
    #[error("minor order {order} exceeds {max}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("all generators are zero")]
    EmptyInput,
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("symbolic engine requires exact input")]
    InexactInput,
    #[error("symbolic engine resource limit exceeded: {0}")]
    EngineOverflow(String),
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
    #[error("state is not pure")]
    NotPure,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
