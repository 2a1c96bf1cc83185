//! Failure taxonomy and process exit codes.
//!
//! Aborts carry the step and node at which the guard fired so that batch logs
//! point straight at the offending location.

use thiserror::Error;

/// Everything that can stop a run.
#[derive(Debug, Error)]
pub enum SolverError {
    /// Rejected configuration (bad parameters, malformed file, unknown problem).
    #[error("configuration error: {0}")]
    Config(String),

    /// Water depth fell below the positivity threshold during stepping.
    #[error(
        "positivity violation: h = {h:.6e} in `{stage}` at step {step}, node ({i1}, {i2})"
    )]
    Positivity {
        step: u64,
        stage: &'static str,
        i1: usize,
        i2: usize,
        h: f64,
    },

    /// Mesh redistribution or metric update produced a nonpositive Jacobian.
    #[error("mesh tangling: J = {j:.6e} at step {step}, node ({i1}, {i2})")]
    MeshTangling { step: u64, i1: usize, i2: usize, j: f64 },

    /// Filesystem failure while writing artifacts or reading configs.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SolverError {
    /// Process exit code for the batch binary: 0 is success, 2 positivity
    /// abort, 3 mesh tangling, 4 configuration error, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            SolverError::Config(_) => 4,
            SolverError::Positivity { .. } => 2,
            SolverError::MeshTangling { .. } => 3,
            SolverError::Io(_) => 1,
        }
    }
}
