use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the toolkit. The message of each validation
/// variant starts with the name of the violated invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NotHermitian: max |M - M^dagger| entry is {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("NotPositive: minimum eigenvalue is {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("TraceNotOne: |tr(M) - 1| is {residual:e}")]
    TraceNotOne { residual: f64 },

    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),

    #[error("BadSubsystemIndex: subsystem {index} does not exist in a state with {count} subsystems")]
    BadSubsystemIndex { index: usize, count: usize },

    #[error("NotUnitary: max |U^dagger U - I| entry is {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("NotNormalized: |<psi|psi> - 1| is {residual:e}")]
    NotNormalized { residual: f64 },

    #[error("InvalidMeasurement: {0}")]
    InvalidMeasurement(String),

    #[error("CompletionFailure: orthonormal completion reached rank {rank} of {needed}")]
    CompletionFailure { rank: usize, needed: usize },

    #[error("InvalidPMF: {0}")]
    InvalidPmf(String),

    #[error("InvalidParams: {0}")]
    InvalidParams(String),

    #[error("NotPure: purity tr(rho^2) is {purity}")]
    NotPure { purity: f64 },

    #[error("DegenerateUndecided: joint diagonalization residual {residual:e} lies in ({tol:e}, {upper:e})", upper = 10.0 * tol)]
    DegenerateUndecided { residual: f64, tol: f64 },

    #[error("StateResultMismatch: {0}")]
    StateResultMismatch(String),

    #[error("Parse: {0}")]
    Parse(String),
}

impl Error {
    /// Short name of the violated invariant, as used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotPositive { .. } => "NotPositive",
            Error::TraceNotOne { .. } => "TraceNotOne",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::BadSubsystemIndex { .. } => "BadSubsystemIndex",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::InvalidMeasurement(_) => "InvalidMeasurement",
            Error::CompletionFailure { .. } => "CompletionFailure",
            Error::InvalidPmf(_) => "InvalidPMF",
            Error::InvalidParams(_) => "InvalidParams",
            Error::NotPure { .. } => "NotPure",
            Error::DegenerateUndecided { .. } => "DegenerateUndecided",
            Error::StateResultMismatch(_) => "StateResultMismatch",
            Error::Parse(_) => "Parse",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
