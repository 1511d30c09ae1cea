use thiserror::Error;

/// Errors raised by the reduction library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a domain invariant (center of mass, mass sign, angle range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// The inertia operator vanishes, so the connection and rotational energy are undefined.
    #[error("singular inertia: {0}")]
    SingularInertia(String),

    /// The quadrature cannot integrate the requested products exactly.
    #[error("band limit exceeded: quadrature band {quadrature} < required {required}")]
    BandLimit { quadrature: usize, required: usize },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("matrix is not positive definite at pivot {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// The iterative eigensolver exhausted its budget; carries the best residuals seen.
    #[error("eigensolver did not converge after {iterations} steps (best residuals {residuals:?})")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::Domain(_) | Error::Dimension { .. } => 2,
            Error::Assembly(_) | Error::BandLimit { .. } | Error::SingularInertia(_) => 3,
            Error::NotPositiveDefinite { .. } | Error::NoConvergence { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
