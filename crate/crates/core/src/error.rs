use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("bad index set: {0}")]
    BadIndexSet(String),
    #[error("bad arity: {0}")]
    BadArity(String),
    #[error("weights must be nonnegative and sum to 1: {0}")]
    WeightMismatch(String),
    #[error("invalid system dimensions: {0}")]
    BadDims(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("state is not pure")]
    NotPure,
    #[error("state is not bipartite ({0} factors)")]
    NotBipartite(usize),
    #[error("channel is not square ({0} -> {1})")]
    NotSquare(usize, usize),
    #[error("Kraus family is not trace preserving (max deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("unknown channel name `{0}`")]
    UnknownName(String),
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("parameter vector has length {got}, manifold expects {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("objective failed at theta = {theta:?}: {message}")]
    ObjectiveFailure { message: String, theta: Vec<f64> },
    #[error("mixed output with local dims {0:?}: exact mixed-state concurrence is only available for two qubits; use convex_roof_upper_bound")]
    UnsupportedMixedOutput(Vec<usize>),
    #[error("channel produced a mixed output; k-ME concurrence is only evaluated on pure outputs (use convex_roof_upper_bound for a sampled bound)")]
    MixedOutputUnsupported,
    #[error("grid of {0} points exceeds the oracle budget")]
    TooLarge(u128),
}

pub type Result<T> = std::result::Result<T, Error>;
