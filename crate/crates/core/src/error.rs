use thiserror::Error;

pub type Result<T> = std::result::Result<T, OpucError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpucError {
    #[error("invalid arity: polynomial of degree {degree} cannot be starred at order {order}")]
    InvalidArity { degree: usize, order: usize },

    #[error("root finder did not converge (best residual {best_residual:e})")]
    Convergence { best_residual: f64 },

    #[error("degenerate interpolation nodes: nodes {first} and {second} coincide")]
    DegenerateNodes { first: usize, second: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid Verblunsky data: {0}")]
    InvalidVerblunsky(String),

    #[error("spectral validity error: root {index} has modulus {modulus} off the unit circle")]
    SpectralValidity { index: usize, modulus: f64 },

    #[error("weight error at node {index}: {reason}")]
    Weight { index: usize, reason: String },

    #[error("not in the Szegő class: extracted |a_{index}| = {modulus} is not below 1")]
    NotSzegoClass { index: usize, modulus: f64 },

    #[error("inverse Szegő step inconsistent: remainder {remainder:e} at degree {degree}")]
    Inconsistency { degree: usize, remainder: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("not a persymmetric spectrum: {0}")]
    NotPersymmetricSpectrum(String),

    #[error("degenerate parameter: {0}")]
    Degeneracy(String),

    #[error("persymmetry violation: {0}")]
    PersymmetryViolation(String),

    #[error("reconstruction mismatch: round-trip spectral residual {0:e}")]
    ReconstructionMismatch(f64),
}
