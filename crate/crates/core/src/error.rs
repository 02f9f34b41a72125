use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Rejections raised while building or analysing premeasurement schemes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} exceeds the configured cap of {cap}", cap = crate::qlin::DIM_CAP)]
    DimensionCap(usize),

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("operator is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not a projector (residual {0:.3e})")]
    NotProjector(f64),

    #[error("ket is not normalized (norm {0})")]
    NotUnit(f64),

    #[error(
        "eigenvalue gap {gap:.3e} falls between the operator tolerance and the grouping tolerance"
    )]
    IllConditionedGrouping { gap: f64 },

    #[error("{set} vectors {i} and {j} are not orthonormal (residual {residual:.3e})")]
    NotOrthonormal {
        set: &'static str,
        i: usize,
        j: usize,
        residual: f64,
    },

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("eigenvalues {i} and {j} coincide")]
    DuplicateEigenvalue { i: usize, j: usize },

    #[error("projectors {i} and {j} are not orthogonal (residual {residual:.3e})")]
    NonOrthogonalProjectors { i: usize, j: usize, residual: f64 },

    #[error("projectors do not sum to the identity (residual {0:.3e})")]
    IncompleteProjectors(f64),

    #[error("assignment entry {index} lies outside the admissible range for k={k} (residual {residual:.3e})")]
    OutsideRange {
        index: usize,
        k: usize,
        residual: f64,
    },

    #[error("assignment source {index} is not an eigenvector of the observable")]
    SourceNotEigenvector { index: usize },

    #[error("branch k={k} needs {needed} assignments but {found} were given")]
    AssignmentCount {
        k: usize,
        needed: usize,
        found: usize,
    },

    #[error(
        "branch k={k} cannot be completed: {needed} inputs but only {available} target dimensions"
    )]
    Uncompletable {
        k: usize,
        needed: usize,
        available: usize,
    },

    #[error("pointer has {available} positions but the observable needs {needed}")]
    InsufficientPointer { needed: usize, available: usize },

    #[error("invalid index function: {0}")]
    InvalidFunction(String),

    #[error("probability form ({probability}) and invariance form (residual {residual:.3e}) of certainty disagree")]
    CertaintyDisagreement { probability: f64, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("scheme is entangled in branch k={k} (pointer marginal rank {rank})")]
    Entangled { k: usize, rank: usize },

    #[error("event has zero probability ({0:.3e})")]
    ZeroProbability(f64),
}
