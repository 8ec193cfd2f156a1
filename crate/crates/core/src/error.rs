use thiserror::Error;

/// The Choi-matrix invariant that a candidate operator violates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChoiViolation {
    /// Matrix size is not `dim_in * dim_out` squared.
    Shape,
    /// Largest elementwise deviation from Hermiticity.
    NotHermitian { deviation: f64 },
    /// Smallest eigenvalue, below the PSD tolerance.
    NotPositive { min_eigenvalue: f64 },
    /// Largest elementwise deviation of the output partial trace from the identity.
    PartialTrace { deviation: f64 },
}

impl std::fmt::Display for ChoiViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChoiViolation::Shape => write!(f, "shape: matrix is not (dim_in*dim_out) square"),
            ChoiViolation::NotHermitian { deviation } => {
                write!(f, "hermitian: max |J - J^dagger| = {deviation:e}")
            }
            ChoiViolation::NotPositive { min_eigenvalue } => {
                write!(f, "positive: minimum eigenvalue {min_eigenvalue:e}")
            }
            ChoiViolation::PartialTrace { deviation } => {
                write!(f, "partial-trace: max |Tr_B J - I| = {deviation:e}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Kraus family is not trace preserving (max |sum K^dagger K - I| = {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("invalid Choi matrix: {0}")]
    InvalidChoi(ChoiViolation),

    #[error("superchannel Kraus family is not complete (max |sum M^dagger M - I| = {deviation:e})")]
    NotComplete { deviation: f64 },

    #[error("superchannel output is not a channel on this input: {0}")]
    NotChannelPreserving(ChoiViolation),

    #[error("outcome {index} of the selective application is not a channel: {violation}")]
    OutcomeNotChannel { index: usize, violation: ChoiViolation },

    #[error("outcome probabilities sum to {total} instead of 1")]
    NormalizationMismatch { total: f64 },

    #[error("unsupported dimensions: {0}")]
    UnsupportedDimension(String),

    #[error("cannot build a {rows}x{cols} isometry: too few output rows")]
    InfeasibleIsometry { rows: usize, cols: usize },

    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),

    #[error("unknown condition `{0}`")]
    UnknownCondition(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
