use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
///
/// The CLI maps these onto exit codes: `Input`, `Unsupported` and
/// `Precondition` exit with 2; `Numeric`, `Defective`, `Resource` and
/// `Internal` exit with 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("numeric error: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("unsupported operation `{op}`: {reason} (gate: {gate})")]
    Unsupported {
        op: &'static str,
        gate: &'static str,
        reason: String,
    },

    #[error("operator is defective: eigenvalue {eigenvalue} has algebraic multiplicity {algebraic} but only {geometric} independent eigenvectors (Jordan block)")]
    Defective {
        eigenvalue: String,
        algebraic: usize,
        geometric: usize,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric {
            message: msg.into(),
            residual,
        }
    }
}
