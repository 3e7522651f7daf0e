use thiserror::Error;

use crate::calderon::Factorization;
use crate::model::MatrixOperator;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },

    /// The power iteration ran out of iterations before the bracket closed.
    #[error("norm iteration budget exhausted after {iterations} steps; bracket [{lower}, {upper}]")]
    NormBudget {
        lower: f64,
        upper: f64,
        iterations: usize,
    },

    #[error("factorization search exhausted its schedule; best bound {}", .best.bound)]
    CalderonBudget { best: Box<Factorization> },

    #[error("extension solver exhausted its budget; best feasible norm {value}")]
    ExtensionBudget {
        value: f64,
        minimizer: Box<MatrixOperator>,
    },

    #[error("oracle refuses input: {0}")]
    Refused(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        if err.is_io() {
            return Error::Io(err.into());
        }
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
