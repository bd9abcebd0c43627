use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error(
        "quadrature did not converge within {subdivisions} subdivisions \
         (estimate {estimate}, error bound {error_bound})"
    )]
    Convergence {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error(
        "matrix is singular or ill-conditioned: smallest singular value {smallest_singular_value:e}, \
         condition number {condition:e}"
    )]
    Singular {
        smallest_singular_value: f64,
        condition: f64,
    },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain { what, value, expected }
    }

    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
