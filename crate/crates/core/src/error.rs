use thiserror::Error;

use crate::spectra::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Spectral data violates the admissibility conditions.
    Validation,
    /// A numerical stage could not produce a trustworthy answer.
    Numerical,
    /// Malformed input, I/O failure or bad configuration.
    Input,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed spectral data: {0}")]
    Structural(String),

    #[error("spectral data rejected: {0}")]
    Invalid(ValidationReport),

    #[error("invalid grid function: {0}")]
    Grid(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(
        "positivity margin {margin:.6e} <= 0: discretised I+F is not uniformly positive, \
         GLM equation is not uniquely solvable"
    )]
    NotPositive { margin: f64 },

    #[error("GLM row system {row} is singular")]
    SingularRow { row: usize },

    #[error(
        "operator is not positive: {below} eigenvalue(s) lie below lambda^2 = {lambda:.6e}^2; \
         shift sigma by c*x or the data by c first"
    )]
    NonPositiveOperator { below: usize, lambda: f64 },

    #[error(
        "bracket mismatch: found {found} of {expected} eigenvalues in scan window \
         [{lo:.6}, {hi:.6}]"
    )]
    BracketMismatch {
        found: usize,
        expected: usize,
        lo: f64,
        hi: f64,
    },

    #[error(
        "lambda[{index}] = {lambda:.12e} is not an eigenvalue (relative residual {residual:.3e})"
    )]
    NotAnEigenvalue {
        index: usize,
        lambda: f64,
        residual: f64,
    },

    #[error(
        "u(1) vanishes (|u(1)|/||u|| = {ratio:.3e}): data inconsistent with a third-type \
         condition at x=1"
    )]
    DirichletAtOne { ratio: f64 },

    #[error("stability probe: every perturbation of size {eps:e} was rejected after {attempts} draws (last: {last})")]
    ProbeRejected {
        eps: f64,
        attempts: usize,
        last: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Invalid(_) => Category::Validation,
            Error::NotPositive { .. }
            | Error::SingularRow { .. }
            | Error::NonPositiveOperator { .. }
            | Error::BracketMismatch { .. }
            | Error::NotAnEigenvalue { .. }
            | Error::DirichletAtOne { .. }
            | Error::ProbeRejected { .. } => Category::Numerical,
            Error::Structural(_)
            | Error::Grid(_)
            | Error::Argument(_)
            | Error::Parse(_)
            | Error::Io(_) => Category::Input,
            Error::Stage { source, .. } => source.category(),
        }
    }

    /// Innermost error, skipping stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
