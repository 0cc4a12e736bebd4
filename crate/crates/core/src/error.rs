use thiserror::Error;

/// Errors raised by symbol construction, eigen computations and the optimizers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coarse-grid symbol is singular at theta = {theta:?}")]
    SingularCoarse { theta: Vec<f64> },

    #[error("numerical failure in {what} (matrix hash {matrix_hash:016x})")]
    NumericalFailure { what: String, matrix_hash: u64 },

    #[error("left and right eigenvectors are nearly orthogonal (|y^T x| = {overlap:e})")]
    DegenerateEigenvector { overlap: f64 },

    #[error("dominant eigenvalue is zero; |lambda| is not differentiable there")]
    ZeroEigenvalue,

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("unknown problem `{name}`; known problems: {}", known.join(", "))]
    UnknownProblem { name: String, known: Vec<String> },

    #[error("evaluation budget of {budget} exhausted after {fevals} evaluations")]
    BudgetExhausted {
        budget: u64,
        fevals: u64,
        best: Option<(Vec<f64>, f64)>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
