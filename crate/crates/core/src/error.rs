use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| entry = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("Jacobi eigen-iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("reduced qubit states need at least two qubits, got N = {n}")]
    NotSymmetricContext { n: u32 },

    #[error("group construction requires integer spin, got 2J = {two_j}")]
    NotIntegerSpin { two_j: u32 },

    #[error("group closure exceeded {limit} elements (expected order {expected})")]
    ClosureOverflow { limit: usize, expected: usize },

    #[error("projector trace {trace} is not an integer")]
    NonIntegerTrace { trace: f64 },

    #[error("state has no component in the invariant subspace (norm {norm:e})")]
    ZeroProjection { norm: f64 },

    #[error("superposition cancels to zero norm ({norm:e})")]
    ZeroNorm { norm: f64 },

    #[error("no trivial irrep of the group in the spin-{two_j}/2 representation")]
    NoTrivialIrrep { two_j: u32 },

    #[error("probe does not satisfy the metrology conditions (residual {residual:e})")]
    NotOptimalProbe { residual: f64 },

    #[error("outcome {outcome} has probability {probability:e} but gradient norm {gradient:e}")]
    SingularOutcome {
        outcome: usize,
        probability: f64,
        gradient: f64,
    },

    #[error("observable covariance is singular (min eigenvalue {min_eig:e})")]
    SingularCovariance { min_eig: f64 },

    #[error("QFIM is singular (min eigenvalue {min_eig:e})")]
    SingularQfim { min_eig: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
