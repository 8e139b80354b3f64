use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    Hermiticity(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
    #[error("operator is not unitary (max deviation {0:.3e})")]
    Unitarity(f64),
    #[error("label error: {0}")]
    Label(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid probability distribution: {0}")]
    Distribution(String),
    #[error("not a density operator: {0}")]
    NotDensity(String),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("indeterminate verdict: conditional entropy {0:.9} is not near -1 or +1")]
    Indeterminate(f64),
    #[error("flow window carries no packets")]
    EmptyWindow,
    #[error("instance too large: {qubits} qubits exceeds the {max}-qubit limit")]
    Size { qubits: usize, max: usize },
    #[error("invalid scenario config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
