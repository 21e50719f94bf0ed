use thiserror::Error;

use crate::conic::SolveStatus;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {0} lies outside [-1, 1]")]
    Domain(f64),

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("duplicate point {0} in `{1}`")]
    DuplicatePoint(f64, &'static str),

    #[error("grid point {point} cannot be separated from exclusion {exclusion} at tolerance {tol}")]
    GridSeparation { point: f64, exclusion: f64, tol: f64 },

    #[error("malformed conic problem: {0}")]
    MalformedProblem(String),

    #[error("conic solver finished with status {status:?}")]
    Solver { status: SolveStatus },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
