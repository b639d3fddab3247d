use thiserror::Error;

/// Typed failures raised by the model-space, functional, optimizer, baseline
/// and refinement layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OmegaError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("operator is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {deviation:e}")]
    Asymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("vector is not normalized: norm = {0}")]
    NotNormalized(f64),

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("spectrum is degenerate: gap {gap:e} between levels {index} and {} is below the guard", index + 1)]
    DegenerateSpectrum { index: usize, gap: f64 },

    #[error("states are parallel: squared overlap {overlap_sq}")]
    ParallelStates { overlap_sq: f64 },

    #[error("trial basis is ill-conditioned: Gram condition number {condition:e}")]
    IllConditionedBasis { condition: f64 },

    #[error("level index {index} out of range for dimension {dim}")]
    LevelOutOfRange { index: usize, dim: usize },

    #[error("trial energy {energy} does not exceed lower approximant {index} energy {lower} by the guard")]
    EnergyOrderingViolation {
        index: usize,
        energy: f64,
        lower: f64,
    },

    #[error("overlap with lower approximants saturates normalization: 1 - sum = {remainder:e}")]
    OverlapSaturation { remainder: f64 },

    #[error("approximant has no component above level {level}")]
    NoHigherComponent { level: usize },

    #[error("auxiliary energy E_f is zero")]
    ZeroEf,

    #[error("invalid steepening parameters: {0}")]
    InvalidSteepening(String),

    #[error("start point violates preconditions: {0}")]
    InfeasibleStart(String),

    #[error("constraints span the whole space")]
    EmptyComplement,

    #[error("target energy {target} outside [{low}, {high}]")]
    TargetOutOfRange { target: f64, low: f64, high: f64 },

    #[error("states are not eigenvectors of the restricted operator: coupling {coupling:e}")]
    NonEigenPair { coupling: f64 },

    #[error("no candidate direction orthogonal to the current pair")]
    NoCandidateDirection,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("malformed matrix file: {0}")]
    MalformedMatrix(String),
}

impl OmegaError {
    /// Stable name of the variant, used as the prefix of machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            OmegaError::DimensionMismatch { .. } => "DimensionMismatch",
            OmegaError::DimensionTooSmall(_) => "DimensionTooSmall",
            OmegaError::Asymmetric { .. } => "Asymmetric",
            OmegaError::NotNormalized(_) => "NotNormalized",
            OmegaError::NonFinite => "NonFinite",
            OmegaError::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            OmegaError::ParallelStates { .. } => "ParallelStates",
            OmegaError::IllConditionedBasis { .. } => "IllConditionedBasis",
            OmegaError::LevelOutOfRange { .. } => "LevelOutOfRange",
            OmegaError::EnergyOrderingViolation { .. } => "EnergyOrderingViolation",
            OmegaError::OverlapSaturation { .. } => "OverlapSaturation",
            OmegaError::NoHigherComponent { .. } => "NoHigherComponent",
            OmegaError::ZeroEf => "ZeroEf",
            OmegaError::InvalidSteepening(_) => "InvalidSteepening",
            OmegaError::InfeasibleStart(_) => "InfeasibleStart",
            OmegaError::EmptyComplement => "EmptyComplement",
            OmegaError::TargetOutOfRange { .. } => "TargetOutOfRange",
            OmegaError::NonEigenPair { .. } => "NonEigenPair",
            OmegaError::NoCandidateDirection => "NoCandidateDirection",
            OmegaError::InvalidParameter(_) => "InvalidParameter",
            OmegaError::NoConvergence { .. } => "NoConvergence",
            OmegaError::MalformedMatrix(_) => "MalformedMatrix",
        }
    }
}

pub type Result<T> = std::result::Result<T, OmegaError>;
