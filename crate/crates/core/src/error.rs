use std::io;

use thiserror::Error;

use crate::optimizer::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error(
        "degenerate block: exact magnitude ties persisted after {retries} perturbation retries"
    )]
    Degenerate { retries: usize },

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The optimizer produced a non-finite or exploding value. The partial
    /// trajectory up to (and excluding) the offending iterate is kept.
    #[error("optimization diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trajectory: Box<Trajectory>,
    },

    #[error("malformed latent file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for failures caused by bad caller input rather than by the
    /// numerics themselves.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_) | Error::Validation(_) | Error::Format(_) | Error::Io(_)
        )
    }
}
