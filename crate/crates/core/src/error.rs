//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("eigen decomposition failed: {0}")]
    EigenFailure(String),

    #[error("spectrum clash: sigma(P) meets -sigma(P), min |lambda_i + lambda_j| = {gap:.3e}")]
    SpectrumClash { gap: f64 },

    #[error("operator is singular (smallest singular value ratio {ratio:.3e})")]
    SingularOperator { ratio: f64 },

    #[error("eigenvalue {alpha} lies outside Z(c, c~) = {z}")]
    NotAdmissibleSpectrum { alpha: f64, z: String },

    #[error("Z(c, c~) has no listed case for c~ = 0 < c (c = {c})")]
    UnlistedCase { c: f64 },

    #[error("no nontrivial admissible data for eigenvalue {alpha} with w1 = {w1}, w2 = {w2}")]
    NoAdmissibleData { alpha: f64, w1: usize, w2: usize },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("frame drift {drift:.3e} exceeds tolerance {tol:.3e} at node {node:?}")]
    IntegrationDrift {
        drift: f64,
        tol: f64,
        node: Vec<usize>,
    },

    #[error("integration diverged: {0}")]
    IntegrationDiverged(String),

    #[error("Omega invariant violated: {0}")]
    OmegaInvariant(String),

    #[error("Omega singular on the requested domain: {0}")]
    SingularOmega(String),

    #[error("active domain is empty: {0}")]
    EmptyDomain(String),

    #[error("duplicate transform parameter {0}")]
    DuplicateOperator(f64),

    #[error("transforms are not compatible: {0}")]
    NotCompatible(String),

    #[error("operator is not block-diagonal for the requested split: {0}")]
    SplitMismatch(String),

    #[error("P* constraint violated at the base node, residual {0:.3e}")]
    ConstraintViolation(f64),
}
