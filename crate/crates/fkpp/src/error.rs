use thiserror::Error;

use crate::grid::GridField;

/// Errors shared by the solvers, the optimizer, and the structure diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative solve exhausted its iteration caps. Carries the best
    /// iterate found so the caller can inspect how far it got.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Box<GridField>,
    },

    /// The discrete linear operator has no usable pivot. For the adjoint
    /// equation this signals that theta is not the stable positive state.
    #[error("singular linear system: {0}")]
    SingularSystem(String),

    /// The state has no isolated critical points (constant theta).
    #[error("degenerate state: {0}")]
    DegenerateState(String),

    /// The resource does not have the jump structure of a maximizer.
    #[error("structure violation: {0}")]
    StructureViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
