use thiserror::Error;

/// Coarse classification used by the command-line driver for exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or structurally invalid input.
    Validation,
    /// The problem lies outside the positivity hypothesis on `L`.
    Hypothesis,
    /// A gated invariant failed: an assembly or solver defect.
    Invariant,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("invalid graph: {}", .0.join("; "))]
    InvalidGraph(Vec<String>),

    #[error("graph spec parse error: {0}")]
    Parse(String),

    #[error("constraints not independent at vertex {vertex}")]
    DependentConstraints { vertex: String },

    #[error("over-constrained graph")]
    OverConstrained,

    #[error("L not positive definite; standing positivity hypothesis violated ({detail})")]
    NotPositiveDefinite { detail: String },

    #[error("decoupled problem on edge {edge} not positive definite")]
    DecoupledNotPositive { edge: String },

    #[error("singular signed mass (|mu| = {mu:e} below threshold)")]
    SingularSignedMass { mu: f64 },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("unknown branch index {0}")]
    UnknownIndex(i64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cone classification violated at branch index {index}: [y,y] = {krein:e}, lambda = {lambda:e}")]
    ConeViolation { index: i64, krein: f64, lambda: f64 },

    #[error("positive cone empty")]
    PositiveConeEmpty,

    #[error("eigenfunction vanishes on G+ (branch index {0})")]
    VanishesOnPositive(i64),

    #[error("internal consistency: negative S-norm radicand {0:e}")]
    NegativeRadicand(f64),

    #[error("non-nested discretizations")]
    NonNested,

    #[error("mesh too coarse for requested n (max relative change {max_change:e} at n = {worst_n})")]
    MeshTooCoarse { worst_n: usize, max_change: f64 },

    #[error("requested {requested} eigenvalues but only {available} available")]
    NotEnoughEigenvalues { requested: usize, available: usize },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidGraph(_)
            | Error::Parse(_)
            | Error::DependentConstraints { .. }
            | Error::OverConstrained
            | Error::UnknownIndex(_)
            | Error::DimensionMismatch { .. }
            | Error::NonNested
            | Error::MeshTooCoarse { .. }
            | Error::NotEnoughEigenvalues { .. } => ErrorClass::Validation,
            Error::NotPositiveDefinite { .. } | Error::DecoupledNotPositive { .. } => {
                ErrorClass::Hypothesis
            }
            Error::SingularSignedMass { .. }
            | Error::NoConvergence
            | Error::ConeViolation { .. }
            | Error::PositiveConeEmpty
            | Error::VanishesOnPositive(_)
            | Error::NegativeRadicand(_) => ErrorClass::Invariant,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
