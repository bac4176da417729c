//! k-symmetric tilings, scaling identities, interval decomposition, the
//! quasi-maximizer construction, and symmetry detection.
//!
//! A function on [0, 1] is k-symmetric when it is the reflect-and-tile of a
//! pattern over k equal cells: cell 2l carries `pattern(kx − 2l)`, cell
//! 2l+1 its reflection. Tiles obey `F_μ(tile) = F_{k²μ}(pattern)`, and a
//! maximizer's restriction to its best critical interval, tiled back over
//! the domain, lands within `2κδ` of the maximum — the quasi-maximizer
//! sandwich this module verifies numerically.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::optimize::{objective, OptimizerResult};
use crate::resource::ResourceProfile;
use crate::state::{SolverOptions, StateSolution};

/// Relative θ′ floor below which a long run of nodes counts as a plateau.
pub const DEFAULT_TOL_DERIV: f64 = 1e-6;

/// Reflect-and-tile of a unit-interval pattern over `k` equal cells, in
/// exact breakpoint arithmetic. `k = 1` returns the pattern unchanged.
pub fn tile_k_symmetric(pattern: &ResourceProfile, k: usize) -> Result<ResourceProfile> {
    if k == 0 {
        return Err(Error::InvalidInput("tile count must be at least 1".into()));
    }
    pattern.check_domain(1.0)?;
    if k == 1 {
        return Ok(pattern.clone());
    }
    let kf = k as f64;
    let bp_in = pattern.breakpoints();
    let v_in = pattern.values();
    let mut bp = vec![0.0];
    let mut values = Vec::with_capacity(k * v_in.len());
    for cell in 0..k {
        let base = cell as f64;
        if cell % 2 == 0 {
            for j in 0..v_in.len() {
                bp.push((base + bp_in[j + 1]) / kf);
                values.push(v_in[j]);
            }
        } else {
            for j in (0..v_in.len()).rev() {
                bp.push((base + 1.0 - bp_in[j]) / kf);
                values.push(v_in[j]);
            }
        }
    }
    *bp.last_mut().unwrap() = 1.0;
    ResourceProfile::new(pattern.kappa(), bp, values)
}

/// Both sides of the dilation identity
/// `F_μ^{(0,1)}(m) = λ · F_{μ/λ²}^{(0,1/λ)}(m(λ·))`.
///
/// The right side is an honest independent solve on `[0, 1/λ]` with
/// `round(n/λ)` intervals, so the two sides carry genuinely different
/// discretization errors and their gap shrinks at second order.
pub fn dilation_identity_check(
    m: &ResourceProfile,
    mu: f64,
    lambda: f64,
    c: f64,
    n: usize,
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "dilation factor must be positive, got {lambda}"
        )));
    }
    let lhs = objective(m, mu, c, Grid::new(n)?, opts)?;

    let length = 1.0 / lambda;
    let n_rhs = ((n as f64 / lambda).round() as usize).max(crate::grid::MIN_GRID_N);
    let grid_rhs = Grid::with_length(n_rhs, length)?;
    let m_rhs = m.rescale_domain(length)?;
    let state = crate::state::solve_state(&m_rhs, mu / (lambda * lambda), grid_rhs, opts)?;
    let rhs = lambda * (state.theta.integrate() - c * m_rhs.mass());
    Ok((lhs, rhs))
}

/// Both sides of the k-symmetric identity `F_μ(tile_k(pattern)) =
/// F_{k²μ}(pattern)`, each solved on its own n-interval unit grid.
///
/// Requires `n` divisible by `k` (cell boundaries on nodes) and enough
/// resolution per cell for the boundary layers of the tiled problem.
pub fn ksym_identity_check(
    pattern: &ResourceProfile,
    k: usize,
    mu: f64,
    c: f64,
    n: usize,
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if n % k != 0 {
        return Err(Error::InvalidInput(format!(
            "n = {n} must be divisible by k = {k}"
        )));
    }
    let per_cell_needed = crate::optimize::boundary_layer_n(k as f64 * k as f64 * mu);
    if n / k < per_cell_needed {
        return Err(Error::InvalidInput(format!(
            "n/k = {} cells per tile cannot resolve the layers; need {per_cell_needed}",
            n / k
        )));
    }
    let grid = Grid::new(n)?;
    let tile = tile_k_symmetric(pattern, k)?;
    let lhs = objective(&tile, mu, c, grid, opts)?;
    let rhs = objective(pattern, (k * k) as f64 * mu, c, grid, opts)?;
    Ok((lhs, rhs))
}

/// Zeros of θ′: always `0` and `L`, plus interior sign changes of the
/// discrete derivative located by linear interpolation. Crossings closer
/// than `2h` merge to their midpoint.
///
/// Fails with [`Error::DegenerateState`] when θ is constant, or when θ′
/// hugs zero over a plateau of more than 10 cells (no isolated zeros).
pub fn critical_points(state: &StateSolution, tol_deriv: f64) -> Result<Vec<f64>> {
    let grid = state.theta.grid();
    let d = state.theta.derivative();
    let dv = d.values();
    let max_d = d.max_abs();
    let theta_scale = state.theta.max_abs();

    if max_d <= 1e-8 * (1.0 + theta_scale) {
        return Err(Error::DegenerateState(
            "theta' vanishes everywhere: constant state has no isolated critical points".into(),
        ));
    }

    let floor = tol_deriv * max_d;
    let mut plateau = 0usize;
    for (i, &v) in dv.iter().enumerate() {
        if v.abs() < floor {
            plateau += 1;
            if plateau > 10 && i > 10 && i < dv.len() - 1 {
                return Err(Error::DegenerateState(format!(
                    "theta' plateau of {plateau} cells around x = {:.4}",
                    grid.node(i)
                )));
            }
        } else {
            plateau = 0;
        }
    }

    // noise floor: a transversal crossing has at least one healthy flank
    let noise = 1e-9 * max_d;
    let mut crossings = Vec::new();
    for i in 1..grid.n() - 1 {
        let a = dv[i];
        let b = dv[i + 1];
        if a == 0.0 {
            continue;
        }
        if a.signum() != b.signum() && (a.abs() > noise || b.abs() > noise) {
            let x = grid.node(i) + grid.h() * a / (a - b);
            crossings.push(x);
        }
    }

    // merge clusters within 2h, drop crossings hugging the boundary zeros
    let mut merged: Vec<f64> = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    let two_h = 2.0 * grid.h();
    for x in crossings {
        if let Some(&last) = cluster.last() {
            if x - last < two_h {
                cluster.push(x);
                continue;
            }
            merged.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            cluster.clear();
        }
        cluster.push(x);
    }
    if !cluster.is_empty() {
        merged.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    }
    merged.retain(|&x| x > two_h && x < grid.length() - two_h);

    let mut out = vec![0.0];
    out.extend(merged);
    out.push(grid.length());
    Ok(out)
}

/// The interval decomposition of Lemma-style averages: per-interval means
/// `A_i = ∫_{a_i}^{a_{i+1}} (θ − cm) / (a_{i+1} − a_i)`, the selected
/// maximizing interval, and the jump position inside it.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalDecomposition {
    /// Critical points `a_0 = 0 < … < a_{N+1} = 1`.
    pub a: Vec<f64>,
    /// Per-interval averages.
    pub averages: Vec<f64>,
    /// Index of the maximizing interval (leftmost on ties).
    pub i_star: usize,
    /// Width of the selected interval.
    pub delta: f64,
    /// Relative jump position of m inside the selected interval.
    pub ell_local: f64,
}

/// Decomposes the objective over the critical intervals of θ.
///
/// Relies on θ′(a_i) = 0: the restriction of the global θ to each interval
/// is that interval's own Neumann solution, so no sub-solves are needed.
/// Fails with [`Error::StructureViolation`] when some interval does not
/// contain exactly one jump of m.
pub fn decompose(
    m: &ResourceProfile,
    state: &StateSolution,
    c: f64,
    a: &[f64],
) -> Result<IntervalDecomposition> {
    if a.len() < 2 {
        return Err(Error::InvalidInput("need at least one interval".into()));
    }
    let mut averages = Vec::with_capacity(a.len() - 1);
    for w in a.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            return Err(Error::InvalidInput("critical points must increase".into()));
        }
        let f_part = state.theta.integrate_between(w[0], w[1]) - c * m.integral_over(w[0], w[1]);
        averages.push(f_part / len);
    }
    let mut i_star = 0usize;
    for (i, &v) in averages.iter().enumerate() {
        if v > averages[i_star] {
            i_star = i;
        }
    }

    for (i, w) in a.windows(2).enumerate() {
        let jumps = m.jumps_within(w[0], w[1]);
        if jumps.len() != 1 {
            return Err(Error::StructureViolation(format!(
                "interval {} = ({:.5}, {:.5}) carries {} jumps of m, expected exactly 1",
                i,
                w[0],
                w[1],
                jumps.len()
            )));
        }
    }

    let delta = a[i_star + 1] - a[i_star];
    let jump = m.jumps_within(a[i_star], a[i_star + 1])[0];
    let ell_local = (jump - a[i_star]) / delta;

    Ok(IntervalDecomposition {
        a: a.to_vec(),
        averages,
        i_star,
        delta,
        ell_local,
    })
}

/// The quasi-maximizer built from a computed maximizer, with the sandwich
/// bookkeeping: `F_bar − 2κδ ≤ F_hat ≤ F_bar` up to solver slack.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiMaximizerReport {
    pub decomposition: IntervalDecomposition,
    /// Tile count `floor(1/δ)`.
    pub k_mu: usize,
    /// Remainder `1 − k_μ δ_μ ∈ [0, δ_μ)`.
    pub r_mu: f64,
    /// Stretch factor `k_μ δ_μ = 1 − r_μ`.
    pub sigma_mu: f64,
    pub m_hat: ResourceProfile,
    /// Objective of the constructed profile.
    pub f_hat: f64,
    /// Objective of the input maximizer.
    pub f_bar: f64,
    /// Theoretical gap `2κδ_μ`.
    pub gap_bound: f64,
}

/// Builds the tiled-and-stretched quasi-maximizer from an optimizer run:
/// select the interval maximizing `A_i`, extract the pattern, and
/// reflect-and-tile it over `k_μ = floor(1/δ_μ)` cells.
pub fn build_quasi_maximizer(
    run: &OptimizerResult,
    c: f64,
    opts: &SolverOptions,
) -> Result<QuasiMaximizerReport> {
    let a = critical_points(&run.theta, DEFAULT_TOL_DERIV)?;
    let decomposition = decompose(&run.m_star, &run.theta, c, &a)?;

    let delta = decomposition.delta;
    let k_mu = (1.0 / delta).floor() as usize;
    let k_mu = k_mu.max(1);
    let sigma_mu = k_mu as f64 * delta;
    let r_mu = 1.0 - sigma_mu;

    let lo = decomposition.a[decomposition.i_star];
    let hi = decomposition.a[decomposition.i_star + 1];
    let pattern = run.m_star.restrict_rescaled(lo, hi)?;
    let m_hat = tile_k_symmetric(&pattern, k_mu)?;

    let grid = run.theta.theta.grid();
    let f_hat = objective(&m_hat, run.theta.mu, c, grid, opts)?;
    let kappa = run.m_star.kappa();

    Ok(QuasiMaximizerReport {
        decomposition,
        k_mu,
        r_mu,
        sigma_mu,
        m_hat,
        f_hat,
        f_bar: run.f_value,
        gap_bound: 2.0 * kappa * delta,
    })
}

/// Scans K from `k_max` down to 2, folding m into K cells with alternating
/// reflection and comparing each cell to the folded average in L¹. Returns
/// the largest K whose worst cell mismatch is within `tol·κ`, with the
/// averaged pattern; `None` when only K = 1 fits.
pub fn detect_symmetry(
    m: &ResourceProfile,
    k_max: usize,
    tol: f64,
) -> Option<(usize, ResourceProfile)> {
    let scale = m.kappa();
    for k in (2..=k_max).rev() {
        let kf = k as f64;
        let mut folds = Vec::with_capacity(k);
        let mut ok = true;
        for cell in 0..k {
            let lo = cell as f64 / kf;
            let hi = (cell + 1) as f64 / kf;
            match m.restrict_rescaled(lo, hi) {
                Ok(q) => folds.push(if cell % 2 == 0 { q } else { q.reflect() }),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let refs: Vec<&ResourceProfile> = folds.iter().collect();
        let Ok(avg) = ResourceProfile::average(&refs) else {
            continue;
        };
        let mismatch = folds
            .iter()
            .map(|q| q.l1_distance(&avg))
            .fold(0.0_f64, f64::max);
        if mismatch <= tol * scale {
            return Some((k, avg));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::solve_state;

    #[test]
    fn tile_k1_is_identity() {
        let p = ResourceProfile::crenel(0.3, 1.0).unwrap();
        assert_eq!(tile_k_symmetric(&p, 1).unwrap(), p);
    }

    #[test]
    fn tile_k2_of_crenel_reflects() {
        // crenel(ℓ) tiled over 2 cells: κ on [0, ℓ/2] ∪ [1 − ℓ/2, 1]
        let p = ResourceProfile::crenel(0.5, 1.0).unwrap();
        let t = tile_k_symmetric(&p, 2).unwrap();
        assert_eq!(t.breakpoints(), &[0.0, 0.25, 0.75, 1.0]);
        assert_eq!(t.values(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn tile_preserves_mass_and_scales_tv() {
        let p = ResourceProfile::crenel(0.3, 1.0).unwrap();
        for k in [1usize, 2, 3, 4, 6, 8] {
            let t = tile_k_symmetric(&p, k).unwrap();
            assert!((t.mass() - p.mass()).abs() <= 1e-14, "mass at k={k}");
            assert_eq!(t.jump_count(), k, "jumps at k={k}");
            assert!((t.total_variation() - k as f64 * p.total_variation()).abs() <= 1e-12);
        }
    }

    #[test]
    fn detect_round_trip() {
        let p = ResourceProfile::crenel(0.3, 1.0).unwrap();
        let t = tile_k_symmetric(&p, 4).unwrap();
        let (k, pattern) = detect_symmetry(&t, 8, 1e-9).unwrap();
        assert_eq!(k, 4);
        assert!(pattern.l1_distance(&p) <= 1e-12);
    }

    #[test]
    fn single_crenel_is_not_symmetric() {
        let m = ResourceProfile::crenel(0.5, 1.0).unwrap();
        assert!(detect_symmetry(&m, 6, 1e-3).is_none());
    }

    #[test]
    fn critical_points_of_monotone_state() {
        let m = ResourceProfile::crenel(0.5, 1.0).unwrap();
        let grid = Grid::new(1024).unwrap();
        let state = solve_state(&m, 0.05, grid, &SolverOptions::default()).unwrap();
        let a = critical_points(&state, DEFAULT_TOL_DERIV).unwrap();
        assert_eq!(a, vec![0.0, 1.0]);
    }

    #[test]
    fn critical_points_of_constant_state_degenerate() {
        let m = ResourceProfile::constant(0.5, 1.0).unwrap();
        let grid = Grid::new(256).unwrap();
        let state = solve_state(&m, 0.1, grid, &SolverOptions::default()).unwrap();
        assert!(matches!(
            critical_points(&state, DEFAULT_TOL_DERIV),
            Err(Error::DegenerateState(_))
        ));
    }

    #[test]
    fn tiled_state_has_cell_boundary_criticals() {
        // 4-symmetric resource: θ inherits the symmetry, so θ' vanishes at
        // the three interior cell boundaries.
        let p = ResourceProfile::crenel(0.4, 1.0).unwrap();
        let t = tile_k_symmetric(&p, 4).unwrap();
        let grid = Grid::new(2048).unwrap();
        let mu = 0.25 / 16.0; // k²μ = 0.25
        let state = solve_state(&t, mu, grid, &SolverOptions::default()).unwrap();
        let a = critical_points(&state, DEFAULT_TOL_DERIV).unwrap();
        assert_eq!(a.len(), 5, "critical points {a:?}");
        for (i, expect) in [0.25, 0.5, 0.75].iter().enumerate() {
            assert!(
                (a[i + 1] - expect).abs() <= 2.0 * grid.h(),
                "interior zero {i} at {} vs {expect}",
                a[i + 1]
            );
        }
    }

    #[test]
    fn decompose_identities() {
        let m = ResourceProfile::crenel(0.5, 1.0).unwrap();
        let grid = Grid::new(1024).unwrap();
        let mu = 0.05;
        let c = 2.0;
        let state = solve_state(&m, mu, grid, &SolverOptions::default()).unwrap();
        let a = critical_points(&state, DEFAULT_TOL_DERIV).unwrap();
        let dec = decompose(&m, &state, c, &a).unwrap();

        let f = state.theta.integrate() - c * m.mass();
        let weighted: f64 = dec
            .averages
            .iter()
            .zip(a.windows(2))
            .map(|(avg, w)| avg * (w[1] - w[0]))
            .sum();
        assert!((weighted - f).abs() <= 1e-9, "decomposition gap {}", weighted - f);
        assert!(f <= dec.averages[dec.i_star] + 1e-9);
        assert!((dec.ell_local - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn decompose_flags_extra_jumps() {
        // two jumps inside the single interval {0, 1} of a monotone state
        let m = ResourceProfile::new(1.0, vec![0.0, 0.3, 0.4, 1.0], vec![1.0, 0.0, 1.0]).unwrap();
        let grid = Grid::new(512).unwrap();
        let state = solve_state(&m, 5.0, grid, &SolverOptions::default()).unwrap();
        // at large μ the state is near-constant but not exactly; build the
        // intervals by hand to exercise the structure check
        let a = vec![0.0, 1.0];
        assert!(matches!(
            decompose(&m, &state, 2.0, &a),
            Err(Error::StructureViolation(_))
        ));
    }

    #[test]
    fn dilation_identity_lambda_one_is_exact() {
        let m = ResourceProfile::crenel(0.3, 1.0).unwrap();
        let (lhs, rhs) =
            dilation_identity_check(&m, 0.05, 1.0, 2.0, 512, &SolverOptions::default()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dilation_identity_constant_resource() {
        let m = ResourceProfile::constant(0.6, 1.0).unwrap();
        let (lhs, rhs) =
            dilation_identity_check(&m, 0.1, 2.0, 2.0, 512, &SolverOptions::default()).unwrap();
        // both sides equal (1 − c)·0.6 = −0.6
        assert!((lhs + 0.6).abs() <= 1e-10, "lhs {lhs}");
        assert!((lhs - rhs).abs() <= 1e-10, "rhs {rhs}");
    }

    #[test]
    fn ksym_identity_trivials() {
        let opts = SolverOptions::default();
        let p = ResourceProfile::crenel(0.4, 1.0).unwrap();
        let (lhs, rhs) = ksym_identity_check(&p, 1, 0.3, 2.0, 512, &opts).unwrap();
        assert_eq!(lhs, rhs);

        let full = ResourceProfile::constant(1.0, 1.0).unwrap();
        let (lhs, rhs) = ksym_identity_check(&full, 4, 0.05, 2.0, 512, &opts).unwrap();
        assert!((lhs + 1.0).abs() <= 1e-9);
        assert!((rhs + 1.0).abs() <= 1e-9);
    }

    #[test]
    fn ksym_identity_requires_divisibility() {
        let p = ResourceProfile::crenel(0.4, 1.0).unwrap();
        assert!(ksym_identity_check(&p, 3, 0.05, 2.0, 1024, &SolverOptions::default()).is_err());
    }
}
