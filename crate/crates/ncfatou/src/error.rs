use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is out of range. `field` names the argument.
    #[error("invalid {field}: {msg}")]
    Invalid { field: String, msg: String },

    /// A series germ violates the condition needed for a Cayley transform or inversion.
    #[error("germ condition violated: {0}")]
    Germ(String),

    #[error("not positive semi-definite: min eigenvalue {min_eig:e} (tolerance {tol:e})")]
    NotPositive { min_eig: f64, tol: f64 },

    #[error("L-Toeplitz violation {violation:e} exceeds tolerance {tol:e}")]
    NotToeplitz { violation: f64, tol: f64 },

    #[error("conjugate gradient did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// True for failures of a numerical diagnostic rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositive { .. } | Error::NotToeplitz { .. } | Error::NoConvergence { .. }
        )
    }
}
