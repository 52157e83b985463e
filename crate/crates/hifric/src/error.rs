//! Error types shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A state left the admissible region (positivity / validity-domain bounds).
    #[error("domain violation in `{what}` at cell {cell}: value {value:.6e} outside [{lo:.3e}, {hi:.3e}]")]
    Domain {
        what: &'static str,
        cell: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A scalar argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Requested time step exceeds the admissible step for the current state.
    #[error("time step {dt:.6e} exceeds admissible step {admissible:.6e}")]
    StepSize { dt: f64, admissible: f64 },

    /// The implicit friction iteration did not converge; the caller should halve dt.
    #[error("friction substep did not converge within {max_iters} iterations (cell {cell})")]
    Stiffness { max_iters: usize, cell: usize },

    /// Driving forces do not sum to zero, so the singular system has no solution.
    #[error("inconsistent driving forces: |sum d_i| = {sum:.3e} exceeds tolerance {tol:.3e}")]
    InconsistentForces { sum: f64, tol: f64 },

    /// Mismatched grid sizes or species counts between coupled objects.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Config parse/validation failure; carries every violation found.
    #[error("config validation failed:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    /// A measured quantity missed a configured acceptance threshold.
    #[error("threshold not met: {0}")]
    Threshold(String),

    /// One or more sweep members failed; carries one status line per epsilon.
    #[error("sweep member(s) failed:\n  {}", .0.join("\n  "))]
    SweepMembers(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code contract: 1 validation, 2 simulation/domain, 3 threshold.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 1,
            Error::Threshold(_) => 3,
            _ => 2,
        }
    }
}
