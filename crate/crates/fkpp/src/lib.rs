//! Steady states and resource optimization for the 1D logistic diffusive
//! equation.
//!
//! The library computes the unique nonnegative steady state `θ_{m,μ}` of
//!
//! ```text
//! −μ θ″ = θ (m − θ)   in (0, 1),    θ′(0) = θ′(1) = 0,
//! ```
//!
//! maximizes the net-yield functional `F_μ(m) = ∫₀¹ (θ_{m,μ} − c m)` over
//! resource distributions `0 ≤ m ≤ κ`, and verifies the structural facts
//! that make small-diffusivity maximizers tractable: bang-bang form with
//! one jump per critical interval of θ, the scaling identities relating
//! tiled resources to rescaled diffusivities, the crenel landscape `G(μ)`
//! with its argmax band, and the periodic quasi-maximizer within `2κδ` of
//! the maximum.
//!
//! Entry points:
//! - [`solve_state`] / [`solve_adjoint`] / [`switching`] for the fields,
//! - [`objective`] / [`pontryagin_maximize`] / [`multistart`] for the
//!   maximization,
//! - [`maximize_over_crenels`] / [`sweep_g`] for the G(μ) landscape,
//! - [`tile_k_symmetric`] / [`build_quasi_maximizer`] / [`detect_symmetry`]
//!   for structure,
//! - [`dilation_identity_check`] / [`ksym_identity_check`] /
//!   [`scaling_check_b`] for the executable identities.
//!
//! A worked guide lives in the `book/` directory of the repository; its
//! code blocks compile as doctests through the companion `fkpp-book` crate.

mod adjoint;
mod error;
mod grid;
mod optimize;
mod resource;
mod state;
mod symmetry;
mod tridiag;

pub use adjoint::{solve_adjoint, switching, AdjointSolution, SwitchingData};
pub use error::{Error, Result};
pub use grid::{Grid, GridField, MIN_GRID_N};
pub use optimize::{
    auto_grid_n, bathtub_update, boundary_layer_n, default_seeds, hamiltonian_flatness,
    maximize_over_crenels, multistart, objective, pontryagin_maximize, random_bang_bang,
    scaling_check_b, sweep_g, MultistartRun, OptimizerConfig, OptimizerResult, SweepRecord,
    SweepResult, MU_BAR_GUESS,
};
pub use resource::ResourceProfile;
pub use state::{
    monotone_step, solve_state, state_residual, InitialGuess, SolveMethod, SolverOptions,
    StateSolution,
};
pub use symmetry::{
    build_quasi_maximizer, critical_points, decompose, detect_symmetry, dilation_identity_check,
    ksym_identity_check, tile_k_symmetric, IntervalDecomposition, QuasiMaximizerReport,
    DEFAULT_TOL_DERIV,
};
