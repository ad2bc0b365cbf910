use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// The operator (or its truncated matrix) does not commute with its
    /// adjoint within tolerance, so no orthonormal eigenbasis is certified.
    #[error("operator is not normal: discrepancy {discrepancy:.6e} exceeds tolerance {tol:.6e}")]
    NotNormal { discrepancy: f64, tol: f64 },

    /// Eigen-division hit a (numerically) zero eigenvalue carrying nonzero mass.
    #[error("eigen-division obstructed at j = {index}: |a_j| = {mass:.6e} on eigenvalue {eigenvalue:.6e}")]
    Unsolvable {
        index: usize,
        mass: f64,
        eigenvalue: f64,
    },

    #[error("coefficient sequence fails the dual-side growth screen: {0}")]
    NotInDual(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
