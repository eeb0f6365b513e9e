use thiserror::Error;

/// Errors raised by state construction, thermal bookkeeping and the protocols.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("not unitary: max |U^dag U - I| = {0:e}")]
    NotUnitary(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("eigen-solver failed to converge")]
    ConvergenceFailure,

    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("invalid inverse temperature {0}")]
    InvalidBeta(f64),

    #[error("target energy {target} outside [{min}, {max}]")]
    EnergyOutOfRange { target: f64, min: f64, max: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("energy budget {delta_e} outside [0, {max}]")]
    BudgetOutOfRange { delta_e: f64, max: f64 },

    #[error("target diagonal is not majorized by the initial diagonal")]
    NotMajorized,

    #[error("not a probability vector: {0}")]
    NotAProbabilityVector(String),

    #[error("source state is at infinite temperature; no coherence can be created")]
    InfiniteTemperatureSource,

    #[error("protocol validity condition violated: {0}")]
    ValidityConditionViolated(String),

    #[error("unitary spends {spent} but the budget is {budget}")]
    EnergyMismatch { spent: f64, budget: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("no admissible sample among {0} draws")]
    NoAdmissibleSample(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
