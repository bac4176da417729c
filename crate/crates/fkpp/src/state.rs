//! Steady states of the logistic diffusive equation.
//!
//! Computes the unique nonnegative solution θ of
//!
//! ```text
//! −μ θ″ = θ (m − θ)   in (0, L),    θ′(0) = θ′(L) = 0
//! ```
//!
//! on the uniform grid with ghost-point Neumann rows. The solve is a damped
//! Newton iteration started from the constant supersolution θ⁰ ≡ κ (which
//! selects the positive solution; θ ≡ 0 attracts Newton only from small
//! initial data), with a monotone supersolution sweep as fallback when the
//! damping underflows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::resource::ResourceProfile;
use crate::tridiag::{neumann_operator, Tridiag, TridiagError};

/// Starting iterate for the Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialGuess {
    /// The constant supersolution θ⁰ ≡ κ.
    Supersolution,
    /// A constant iterate, e.g. the resource mass (used by the uniqueness
    /// probe).
    Constant(f64),
}

/// Tolerances and iteration caps for [`solve_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Absolute ∞-norm residual target. The effective target is
    /// `max(tol_residual, rounding floor)`: on fine grids the second
    /// difference of an O(κ) field cannot be evaluated below
    /// `O(ε·κ·μ/h²)`, and no iteration can beat that.
    pub tol_residual: f64,
    pub max_newton: usize,
    pub max_monotone: usize,
    /// Smallest Newton damping factor before falling back.
    pub damping_min: f64,
    /// Kept at 0: tiny-mass resources simply produce tiny θ.
    pub positive_floor: f64,
    pub init: InitialGuess,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_residual: 1e-11,
            max_newton: 50,
            max_monotone: 5000,
            damping_min: (2.0_f64).powi(-20),
            positive_floor: 0.0,
            init: InitialGuess::Supersolution,
        }
    }
}

/// Which iteration produced the returned state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Newton,
    Monotone,
}

/// A converged steady state together with solver metadata.
#[derive(Debug, Clone)]
pub struct StateSolution {
    pub theta: GridField,
    pub mu: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub method: SolveMethod,
}

fn check_mu(mu: f64) -> Result<()> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::InvalidInput(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

/// ∞-norm of the discrete residual `−μ D²θ − θ(m−θ)`, ghost rows included.
pub fn state_residual(theta: &GridField, m: &ResourceProfile, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let m_field = m.sample(theta.grid())?;
    let r = residual_vec(theta.values(), m_field.values(), mu, theta.grid().h());
    Ok(inf_norm(&r))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn residual_vec(theta: &[f64], m: &[f64], mu: f64, h: f64) -> Vec<f64> {
    let n = theta.len() - 1;
    let w = mu / (h * h);
    let mut r = vec![0.0; n + 1];
    r[0] = -w * 2.0 * (theta[1] - theta[0]) - theta[0] * (m[0] - theta[0]);
    for i in 1..n {
        r[i] = -w * (theta[i - 1] - 2.0 * theta[i] + theta[i + 1]) - theta[i] * (m[i] - theta[i]);
    }
    r[n] = -w * 2.0 * (theta[n - 1] - theta[n]) - theta[n] * (m[n] - theta[n]);
    r
}

/// Residual level below which f64 evaluation of the stencil is pure noise:
/// the second difference of an O(‖θ‖) field carries cancellation noise of
/// order ε‖θ‖, amplified by μ/h². Convergence always aims for the nominal
/// tolerance; the floor is only accepted once the iteration stalls.
fn residual_floor(theta: &[f64], m: &[f64], mu: f64, h: f64) -> f64 {
    let t = inf_norm(theta);
    let scale = mu / (h * h) * t + t * (inf_norm(m) + t);
    8.0 * f64::EPSILON * scale
}

/// Newton linearization `−μ D² − diag(m − 2θ)`.
fn jacobian(theta: &[f64], m: &[f64], mu: f64, h: f64) -> Tridiag {
    let shift: Vec<f64> = theta.iter().zip(m).map(|(&t, &mv)| 2.0 * t - mv).collect();
    neumann_operator(mu, h, &shift)
}

/// One sweep of the monotone iteration
/// `(−μ D² + K) θ⁺ = θ(m − θ) + K θ` with `K = 2κ`.
///
/// Started from the supersolution θ ≡ κ this produces a pointwise
/// non-increasing sequence converging to the positive solution.
pub fn monotone_step(
    theta: &GridField,
    m_field: &GridField,
    mu: f64,
    kappa: f64,
) -> Result<GridField> {
    check_mu(mu)?;
    let big_k = 2.0 * kappa;
    let h = theta.grid().h();
    let shift = vec![big_k; theta.values().len()];
    let rhs: Vec<f64> = theta
        .values()
        .iter()
        .zip(m_field.values())
        .map(|(&t, &mv)| t * (mv - t) + big_k * t)
        .collect();
    let sys = neumann_operator(mu, h, &shift);
    let next = sys.solve(rhs).map_err(|e| match e {
        TridiagError::Singular { row, pivot } => Error::SingularSystem(format!(
            "monotone sweep pivot {pivot:.3e} at row {row}"
        )),
    })?;
    GridField::new(theta.grid(), next)
}

/// Computes the steady state `θ_{m,μ}` on `grid`.
///
/// Zero-mass resources return θ ≡ 0 immediately (the only nonnegative
/// solution). Otherwise Newton runs from the supersolution with step
/// halving; if the damping underflows, the monotone sweep finishes the job.
pub fn solve_state(
    m: &ResourceProfile,
    mu: f64,
    grid: Grid,
    opts: &SolverOptions,
) -> Result<StateSolution> {
    check_mu(mu)?;
    let m_field = m.sample(grid)?;

    if m.mass() == 0.0 {
        return Ok(StateSolution {
            theta: GridField::constant(grid, 0.0),
            mu,
            residual_norm: 0.0,
            iterations: 0,
            method: SolveMethod::Newton,
        });
    }

    let h = grid.h();
    let start = match opts.init {
        InitialGuess::Supersolution => m.kappa(),
        InitialGuess::Constant(v) => v,
    };
    let mut theta = vec![start; grid.num_nodes()];
    let mut newton_iters = 0usize;
    let mut converged = false;

    let mut res = residual_vec(&theta, m_field.values(), mu, h);
    let mut res_norm = inf_norm(&res);

    while newton_iters < opts.max_newton {
        if res_norm <= opts.tol_residual {
            converged = true;
            break;
        }
        newton_iters += 1;
        let sys = jacobian(&theta, m_field.values(), mu, h);
        let neg_r: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = match sys.solve(neg_r) {
            Ok(d) => d,
            Err(_) => break, // indefinite mid-path; let the sweep take over
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha >= opts.damping_min {
            let trial: Vec<f64> = theta
                .iter()
                .zip(&delta)
                .map(|(&t, &d)| t + alpha * d)
                .collect();
            let trial_res = residual_vec(&trial, m_field.values(), mu, h);
            let trial_norm = inf_norm(&trial_res);
            if trial_norm < res_norm {
                theta = trial;
                res = trial_res;
                res_norm = trial_norm;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // stalled at the rounding floor is still converged
            if res_norm <= residual_floor(&theta, m_field.values(), mu, h) {
                converged = true;
            }
            break;
        }
    }
    if !converged && res_norm <= opts.tol_residual {
        converged = true;
    }

    let mut method = SolveMethod::Newton;
    let mut total_iters = newton_iters;

    if !converged {
        // Monotone fallback, descending from the supersolution.
        method = SolveMethod::Monotone;
        let mut field = GridField::constant(grid, m.kappa());
        let mut prev_res = f64::INFINITY;
        let mut sweep_res = f64::INFINITY;
        for k in 0..opts.max_monotone {
            let r = residual_vec(field.values(), m_field.values(), mu, h);
            sweep_res = inf_norm(&r);
            let stagnated = sweep_res >= prev_res * (1.0 - 1e-3);
            if sweep_res <= opts.tol_residual
                || (stagnated
                    && sweep_res <= residual_floor(field.values(), m_field.values(), mu, h))
            {
                converged = true;
                total_iters += k;
                break;
            }
            prev_res = sweep_res;
            field = monotone_step(&field, &m_field, mu, m.kappa())?;
        }
        theta = field.values().to_vec();
        res_norm = sweep_res;
        if !converged {
            total_iters += opts.max_monotone;
            return Err(Error::NonConvergence {
                iterations: total_iters,
                residual: res_norm,
                best: Box::new(field),
            });
        }
    }

    // Discrete maximum principle as a post-check: 0 ≤ θ ≤ max(m).
    let upper = m.max_value() + 1e-10;
    let lower = opts.positive_floor - 1e-10;
    if theta.iter().any(|&t| t < lower || t > upper) {
        let field = GridField::new(grid, theta)?;
        return Err(Error::NonConvergence {
            iterations: total_iters,
            residual: res_norm,
            best: Box::new(field),
        });
    }

    Ok(StateSolution {
        theta: GridField::new(grid, theta)?,
        mu,
        residual_norm: res_norm,
        iterations: total_iters,
        method,
    })
}
