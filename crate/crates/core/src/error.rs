use thiserror::Error;

/// Errors raised by the simulator, the oracles and the bound evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the configured cap of {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("invalid register layout: {0}")]
    InvalidLayout(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("function undefined at eigenvalue {eigenvalue}")]
    Domain { eigenvalue: f64 },

    #[error("non-finite entry produced")]
    NonFinite,

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("resource support mismatch: {0}")]
    SupportMismatch(String),

    #[error("|delta| = {delta} must be below 1; increase the number of Trotter steps")]
    DeltaOutOfRange { delta: f64 },

    #[error("post-selection probability {probability:.3e} vanished at step {step}")]
    Extinction { step: usize, probability: f64 },

    #[error("bound undefined: {0}")]
    UndefinedBound(String),

    #[error("spectral gap is zero; the bound requires a non-degenerate ground state")]
    DegenerateGap,
}

pub type Result<T> = std::result::Result<T, Error>;
