use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "{what} did not converge after {iterations} iterations (last residual {residual:.3e})"
    )]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("time step unstable at t = {time}: sup-norm {sup_norm:.3e} exceeds {limit:.3e}")]
    Unstable {
        time: f64,
        sup_norm: f64,
        limit: f64,
    },

    #[error("eigenvector is not sign-definite (min {min:.3e}, max {max:.3e})")]
    NotSignDefinite { min: f64, max: f64 },

    #[error("classification mismatch: {0}")]
    ClassificationMismatch(String),

    #[error("root not bracketed: {0}")]
    NotBracketed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable short name used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Geometry(_) => "geometry",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Precondition(_) => "precondition",
            Error::NonConvergence { .. } => "non_convergence",
            Error::LinearSolve(_) => "linear_solve",
            Error::Unstable { .. } => "unstable",
            Error::NotSignDefinite { .. } => "not_sign_definite",
            Error::ClassificationMismatch(_) => "classification_mismatch",
            Error::NotBracketed(_) => "not_bracketed",
            Error::Io(_) => "io",
        }
    }

    /// True for errors caused by bad input rather than by a solver.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Geometry(_)
                | Error::InvalidParameter(_)
                | Error::Precondition(_)
        )
    }
}
