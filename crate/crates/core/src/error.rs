use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    NotPositive { min_eigenvalue: f64, tolerance: f64 },

    #[error("unsupported number of qubits: {0} (only 1 or 2)")]
    UnsupportedQubits(usize),

    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: estimated error {estimated_error:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimated_error: f64, tolerance: f64 },

    #[error("linear program is infeasible (residual {residual:e})")]
    LpInfeasible { residual: f64 },

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("simplex iteration limit {0} reached")]
    LpIterationLimit(usize),

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    Eigensolver { residual: f64, iterations: usize },

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("extremum found on the boundary of the search range at {at}")]
    PeakOnBoundary { at: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("collapse cost surface is flat")]
    DegenerateCost,

    #[error("grid too coarse for stable differencing: {0}")]
    GridTooCoarse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
