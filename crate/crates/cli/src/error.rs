use std::io;
use std::path::PathBuf;

use optrec::conic::SolveStatus;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Spec(String),

    #[error("cannot read `{}`: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write `{}`: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },

    #[error("solver finished with status {}", .0.as_str())]
    Solver(SolveStatus),

    #[error("malformed conic problem: {0}")]
    Numerical(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("convergence table is not monotone: {0}")]
    NotMonotone(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Spec(_) | CliError::Read { .. } | CliError::Write { .. } => 1,
            CliError::Solver(SolveStatus::Infeasible | SolveStatus::Unbounded) => 2,
            CliError::Solver(_) | CliError::Numerical(_) | CliError::NotMonotone(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl From<optrec::Error> for CliError {
    fn from(e: optrec::Error) -> Self {
        match e {
            optrec::Error::Solver { status } => CliError::Solver(status),
            optrec::Error::MalformedProblem(m) => CliError::Numerical(m),
            other => CliError::Spec(other.to_string()),
        }
    }
}
