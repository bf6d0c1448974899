use thiserror::Error;

/// Errors surfaced by the simulation, training, and certification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("ISS fit infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate transition kernel: noise_sigma must be positive to bound total variation")]
    DegenerateKernel,

    #[error("horizon mismatch: expected {expected} steps, got {got}")]
    HorizonMismatch { expected: usize, got: usize },

    #[error("state/action space too large for exhaustive enumeration: {0}")]
    SpaceTooLarge(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code convention: 2 for usage/config problems, 1 for
    /// assertion or invariant failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::DegenerateKernel | Error::Io(_) => 2,
            _ => 1,
        }
    }
}
