use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix has no rows")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary (||U*U - I||_F = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("tolerance {0:e} outside (0, 1e-3)")]
    InvalidTolerance(f64),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("family {0:?} is not pairwise compatible")]
    IncompatibleFamily(Vec<usize>),

    #[error("generated sublattice exceeds {0} elements")]
    ClosureOverflow(usize),

    #[error("lattice projection formulas disagree on eigenspace {index} (distance {distance:e})")]
    ProjectionMismatch { index: usize, distance: f64 },

    #[error("{field}: {message}")]
    Input { field: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Input {
            field: field.into(),
            message: message.into(),
        }
    }
}
