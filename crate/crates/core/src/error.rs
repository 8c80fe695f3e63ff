use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive semi-definite (pivot {pivot} at row {row})")]
    NotPositiveSemiDefinite { row: usize, pivot: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("eigen-decomposition did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no admissible collaborator: every psi(r_ik) is zero")]
    NoAdmissibleCollaborator,

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }
}
