use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian within tolerance")]
    NonHermitian,

    #[error("eigenvalue iteration failed to converge: {0}")]
    NoConvergence(String),

    #[error("matrix is numerically singular")]
    Singular,

    #[error("eigenvector basis too ill-conditioned for spectral application (cond = {cond:.3e})")]
    IllConditionedEigenbasis { cond: f64 },

    #[error("bad geometry: {0}")]
    BadGeometry(String),

    #[error("contour inner radius {eps0:.3e} reaches into the resolvent ball of radius {resolvent_radius:.3e}")]
    ContourTooTight { eps0: f64, resolvent_radius: f64 },

    #[error("contour angle {contour:.4} does not exceed the operator angle {operator:.4}")]
    AngleConflict { contour: f64, operator: f64 },

    #[error("generator has spectral bound {spectral_bound:.3e} >= 0; semigroup would not decay")]
    UnstableGenerator { spectral_bound: f64 },

    #[error("operator hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("shift parameter sits at the branch point of the square-root splitting")]
    BranchPoint,

    #[error("square-root argument has spectrum touching the branch cut (-inf, 0]")]
    SpectrumOnCut,

    #[error("Neumann series for the boundary correction diverges (|e^(2cT)| = {norm:.6})")]
    NeumannSeriesDivergence { norm: f64 },

    #[error("boundary coefficient system is numerically singular (cond = {cond:.3e})")]
    SingularBoundarySystem { cond: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameters: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
