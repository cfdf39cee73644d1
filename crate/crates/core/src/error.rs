use thiserror::Error;

/// Failures raised by the decomposition, capacity and monotone routines.
///
/// Numerical variants carry the residual that was actually achieved so the
/// caller can judge how far off the input was.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})"
    )]
    Convergence { sweeps: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical inconsistency: {what} (residual {residual:e})")]
    NumericalInconsistency { what: String, residual: f64 },

    #[error("{n} qubits exceeds the size cap of {cap} qubits")]
    Size { n: usize, cap: usize },

    #[error("ket is not normalized (norm {norm})")]
    Normalization { norm: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("no entangler exists for an odd number of qubits (n = {n})")]
    EntanglerNonexistent { n: usize },

    #[error("the standard finagler needs an odd number of qubits n >= 3 (n = {n})")]
    FinaglerArgument { n: usize },

    #[error("structure check failed: {0}")]
    Structure(String),

    #[error("operation is only available for an even number of qubits (n = {n})")]
    UnsupportedParity { n: usize },

    #[error("no square-root branch makes the orthogonal factor real (imaginary mass {imaginary_mass:e})")]
    BranchSelection { imaginary_mass: f64 },

    #[error("capacity optimizer failed: {0}")]
    Optimization(String),

    #[error("degenerate transport pair: {0}")]
    Degeneracy(String),

    #[error("index out of range: {0}")]
    Index(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
