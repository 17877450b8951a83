use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: |a[{row}][{col}] - conj(a[{col}][{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at [{row}][{col}]")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigenvalue {eigenvalue:e} lies outside the function domain {domain}")]
    DomainViolation { eigenvalue: f64, domain: String },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("Kraus map is not trace preserving: completeness residual {residual:e}")]
    NotTracePreserving { residual: f64 },

    #[error("operators are not a complete Kraus family: residual {residual:e}")]
    CompletenessViolation { residual: f64 },

    #[error("completeness sum is not the support projector of the target state: residual {residual:e}")]
    NotReversalShaped { residual: f64 },

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("distribution is not stationary for the transition matrix: residual {residual:e}")]
    NotStationary { residual: f64 },

    #[error("reference state sigma_{t} is rank deficient")]
    SingularSigma { t: usize },

    #[error("state at t = {t} is rank deficient")]
    SingularState { t: usize },

    #[error("process value Y_{t} is not full rank positive definite")]
    SingularProcess { t: usize },

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochastic(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid Kraus map: {0}")]
    InvalidKraus(String),

    #[error("invalid projector family: {0}")]
    InvalidFamily(String),

    #[error("projector families differ between the two path spaces")]
    FamilyMismatch,

    #[error("path enumeration needs {paths} paths, above the cap of {cap}")]
    EnumerationCapExceeded { paths: u128, cap: u128 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid tolerances: {0}")]
    InvalidTolerance(String),
}
