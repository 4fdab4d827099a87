use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Shapes, meshes or time grids that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// A parameter outside the admissible range of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// NaN or overflow while evaluating an integrand.
    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Tabulated data queried outside its range.
    #[error("extrapolation error: {0}")]
    Extrapolation(String),

    /// An iterative method failed to converge.
    #[error("solver error: {reason} (residual {residual:e})")]
    Solver { reason: String, residual: f64 },

    /// Malformed configuration or input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
