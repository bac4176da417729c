//! Adjoint state, switching function, objective gradient, and Hamiltonian.
//!
//! The adjoint p solves the linear Neumann problem
//!
//! ```text
//! −μ p″ − (m − 2θ) p = 1   in (0, L),    p′(0) = p′(L) = 0
//! ```
//!
//! at the converged state θ. The switching function Φ = pθ drives the
//! bathtub rule: a maximizer carries m = κ where Φ > c and m = 0 where
//! Φ < c, and Φ − c is the L² gradient of the objective. The Hamiltonian
//! `H = μ p′θ′ + pθ(m − θ) + θ − cm` is constant along optimal trajectories
//! and serves as a fixed-point diagnostic.

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::resource::ResourceProfile;
use crate::state::{StateSolution, state_residual};
use crate::tridiag::{neumann_operator, TridiagError};

/// Largest state residual accepted when checking that (θ, m) belong
/// together; converged solves sit orders of magnitude below this.
const CONSISTENCY_TOL: f64 = 1e-6;

/// Adjoint state with solve diagnostics.
#[derive(Debug, Clone)]
pub struct AdjointSolution {
    pub p: GridField,
    pub mu: f64,
    pub residual_norm: f64,
    /// Smallest nodal value; positivity is expected (and reported) but not
    /// asserted, since the continuum statement is not part of the contract.
    pub min_value: f64,
}

/// Switching data at a state/adjoint pair: Φ, the gradient Φ − c, the
/// Hamiltonian field, and the sampled resource the fields were built from.
#[derive(Debug, Clone)]
pub struct SwitchingData {
    pub phi: GridField,
    pub gradient: GridField,
    pub hamiltonian: GridField,
    pub c: f64,
    /// Cell-averaged resource on the grid (enters H directly).
    pub m_nodes: GridField,
    /// The exact resource the pair was computed at; bathtub tie cells keep
    /// its value.
    pub resource: ResourceProfile,
}

/// Solves the adjoint equation at a converged positive state.
///
/// Fails with [`Error::SingularSystem`] when the linearized operator has no
/// usable pivot — in particular at θ ≡ 0, where `−μp″ = 1` with Neumann
/// conditions is incompatible — and with [`Error::InvalidInput`] when θ is
/// not actually a state for `m`.
pub fn solve_adjoint(m: &ResourceProfile, state: &StateSolution) -> Result<AdjointSolution> {
    let grid = state.theta.grid();
    let mu = state.mu;
    if m.mass() == 0.0 {
        return Err(Error::SingularSystem(
            "zero resource: −μp″ = 1 with Neumann conditions has no solution".into(),
        ));
    }
    let res = state_residual(&state.theta, m, mu)?;
    if res > CONSISTENCY_TOL {
        return Err(Error::InvalidInput(format!(
            "theta is not a converged state for this resource (residual {res:.3e})"
        )));
    }

    let m_field = m.sample(grid)?;
    let shift: Vec<f64> = state
        .theta
        .values()
        .iter()
        .zip(m_field.values())
        .map(|(&t, &mv)| 2.0 * t - mv)
        .collect();
    let sys = neumann_operator(mu, grid.h(), &shift);
    let p = sys.solve(vec![1.0; grid.num_nodes()]).map_err(|e| match e {
        TridiagError::Singular { row, pivot } => Error::SingularSystem(format!(
            "adjoint operator pivot {pivot:.3e} at row {row}; theta is not the stable positive state"
        )),
    })?;

    // recompute the residual the honest way, ghost rows included
    let h = grid.h();
    let w = mu / (h * h);
    let n = grid.n();
    let mut residual_norm = 0.0_f64;
    for i in 0..=n {
        let lap = if i == 0 {
            2.0 * (p[1] - p[0])
        } else if i == n {
            2.0 * (p[n - 1] - p[n])
        } else {
            p[i - 1] - 2.0 * p[i] + p[i + 1]
        };
        let r = -w * lap + shift[i] * p[i] - 1.0;
        residual_norm = residual_norm.max(r.abs());
    }

    let field = GridField::new(grid, p)?;
    let min_value = field.min_value();
    Ok(AdjointSolution {
        p: field,
        mu,
        residual_norm,
        min_value,
    })
}

/// Builds Φ = pθ, the gradient Φ − c, and the Hamiltonian field, using the
/// same derivative stencils as the solvers so fixed-point flatness is
/// achievable to discretization order.
pub fn switching(
    m: &ResourceProfile,
    state: &StateSolution,
    adjoint: &AdjointSolution,
    c: f64,
) -> Result<SwitchingData> {
    let grid = state.theta.grid();
    if adjoint.p.grid() != grid {
        return Err(Error::InvalidInput(
            "state and adjoint live on different grids".into(),
        ));
    }
    if !c.is_finite() {
        return Err(Error::InvalidInput(format!("c must be finite, got {c}")));
    }
    let m_nodes = m.sample(grid)?;
    let theta = state.theta.values();
    let p = adjoint.p.values();

    let phi: Vec<f64> = theta.iter().zip(p).map(|(&t, &q)| q * t).collect();
    let gradient: Vec<f64> = phi.iter().map(|v| v - c).collect();

    let dtheta = state.theta.derivative();
    let dp = adjoint.p.derivative();
    let mu = state.mu;
    let hamiltonian: Vec<f64> = (0..grid.num_nodes())
        .map(|i| {
            let mv = m_nodes.values()[i];
            mu * dp.values()[i] * dtheta.values()[i] + phi[i] * (mv - theta[i]) + theta[i]
                - c * mv
        })
        .collect();

    Ok(SwitchingData {
        phi: GridField::new(grid, phi)?,
        gradient: GridField::new(grid, gradient)?,
        hamiltonian: GridField::new(grid, hamiltonian)?,
        c,
        m_nodes,
        resource: m.clone(),
    })
}

impl SwitchingData {
    /// The L² gradient of the objective at m: the field Φ − c, so that
    /// `δF = ∫ (Φ − c) h` for admissible perturbation directions h.
    pub fn gateaux_gradient(&self) -> &GridField {
        &self.gradient
    }
}
