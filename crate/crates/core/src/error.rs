use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Mismatched dimensions between operands (vectors, matrices, symbols).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Structurally invalid input (bad exponent, non-positive scale, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An integration domain whose boundary does not yet satisfy the tail
    /// bound; the offending boundary point is reported so the domain can be
    /// enlarged.
    #[error(
        "tail bound violated at boundary point {point:?}: exponent {value:.6e} < required {required:.6e}"
    )]
    TailBound {
        point: Vec<f64>,
        value: f64,
        required: f64,
    },

    /// An iterative refinement that did not converge within its budget.
    #[error("no convergence after {steps} refinement steps: {context}")]
    NonConvergence { steps: usize, context: String },

    /// A search that found no isolated extremum.
    #[error("degenerate extremum: {0}")]
    Degenerate(String),

    /// A comparison window that clips a non-negligible amount of mass.
    #[error("window clips mass: {0}")]
    WindowClipped(String),

    /// Exact rational arithmetic produced a value not representable in f64.
    #[error("rational coefficient not representable: {0}")]
    CoefficientOverflow(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
