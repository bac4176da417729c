//! Uniform 1D grid, nodal fields, trapezoidal quadrature, and discrete
//! differentiation.
//!
//! Everything downstream (state solves, adjoints, objectives) lives on these
//! two types. Grids are node-centered: node `i` owns the cell
//! `[x_i - h/2, x_i + h/2] ∩ [0, L]`, so the trapezoidal weights are exactly
//! the cell widths and cell-averaged resources integrate back to their exact
//! mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible node-interval count; anything coarser cannot resolve
/// the tests this library is built for.
pub const MIN_GRID_N: usize = 16;

/// Uniform grid with `n` intervals on `[0, length]`.
///
/// Nodes sit at `x_i = length · i/n` for `i = 0..=n`; both endpoints are
/// exact. The default domain is the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    h: f64,
    length: f64,
}

impl Grid {
    /// Uniform grid with `n ≥ 16` intervals on `[0, 1]`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_length(n, 1.0)
    }

    /// Uniform grid on `[0, length]`. Used by the dilation identity, which
    /// solves on `[0, 1/λ]`.
    pub fn with_length(n: usize, length: f64) -> Result<Self> {
        if n < MIN_GRID_N {
            return Err(Error::InvalidInput(format!(
                "grid needs at least {MIN_GRID_N} intervals, got {n}"
            )));
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        Ok(Self {
            n,
            h: length / n as f64,
            length,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Node spacing `length / n`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn num_nodes(&self) -> usize {
        self.n + 1
    }

    /// Coordinate of node `i`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        self.length * (i as f64 / self.n as f64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|i| self.node(i))
    }

    /// Trapezoidal quadrature weight of node `i` (`h/2` at the ends, `h`
    /// inside). Equals the width of the node's cell.
    pub fn quad_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n {
            0.5 * self.h
        } else {
            self.h
        }
    }

    /// Cell `[x_i - h/2, x_i + h/2] ∩ [0, length]` owned by node `i`.
    pub fn cell(&self, i: usize) -> (f64, f64) {
        debug_assert!(i <= self.n);
        let two_n = (2 * self.n) as f64;
        let lo = if i == 0 {
            0.0
        } else {
            self.length * ((2 * i - 1) as f64 / two_n)
        };
        let hi = if i == self.n {
            self.length
        } else {
            self.length * ((2 * i + 1) as f64 / two_n)
        };
        (lo, hi)
    }
}

/// Neumaier-compensated sum; keeps quadrature exact to a few ulps even on
/// 2^16-node grids.
pub(crate) fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for t in terms {
        let next = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - next) + t;
        } else {
            comp += (t - next) + sum;
        }
        sum = next;
    }
    sum + comp
}

/// Nodal values of a function on a [`Grid`]. Carries θ, p, Φ, and the
/// Hamiltonian samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "field needs {} nodal values, got {}",
                grid.num_nodes(),
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("field values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.num_nodes()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[cfg(test)]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Composite trapezoidal value of `∫₀ᴸ f`; second-order accurate, exact
    /// on affine data, compensated so nonnegative data sums to a few ulps.
    pub fn integrate(&self) -> f64 {
        let g = &self.grid;
        compensated_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(i, v)| g.quad_weight(i) * v),
        )
    }

    /// Piecewise-linear interpolant value at `x` (clamped to the domain).
    pub fn interp(&self, x: f64) -> f64 {
        let g = &self.grid;
        let t = (x / g.length()).clamp(0.0, 1.0) * g.n() as f64;
        let i = (t.floor() as usize).min(g.n() - 1);
        let frac = t - i as f64;
        (1.0 - frac) * self.values[i] + frac * self.values[i + 1]
    }

    /// Integral of the piecewise-linear interpolant over `[a, b]`.
    /// Splitting `[0, L]` at arbitrary points and summing the parts
    /// reproduces [`integrate`](Self::integrate) up to rounding.
    pub fn integrate_between(&self, a: f64, b: f64) -> f64 {
        let g = &self.grid;
        let a = a.clamp(0.0, g.length());
        let b = b.clamp(0.0, g.length());
        if b <= a {
            return 0.0;
        }
        let n = g.n() as f64;
        let first = ((a / g.length() * n).floor() as usize).min(g.n() - 1);
        let last = ((b / g.length() * n).ceil() as usize).max(first + 1).min(g.n());
        let terms = (first..last).map(|i| {
            let lo = g.node(i).max(a);
            let hi = g.node(i + 1).min(b);
            if hi > lo {
                0.5 * (hi - lo) * (self.interp(lo) + self.interp(hi))
            } else {
                0.0
            }
        });
        compensated_sum(terms)
    }

    /// Discrete derivative: central differences inside, one-sided
    /// second-order stencils at the endpoints. Exact on affine data.
    pub fn derivative(&self) -> GridField {
        let g = &self.grid;
        let n = g.n();
        let v = &self.values;
        let two_h = 2.0 * g.h();
        let mut out = vec![0.0; n + 1];
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / two_h;
        for i in 1..n {
            out[i] = (v[i + 1] - v[i - 1]) / two_h;
        }
        out[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / two_h;
        GridField {
            grid: self.grid,
            values: out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn make_grid_basics() {
        let g = Grid::new(16).unwrap();
        assert_eq!(g.h(), 0.0625);
        assert_eq!(g.num_nodes(), 17);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(16), 1.0);

        let g = Grid::new(1024).unwrap();
        assert_eq!(g.h(), 1.0 / 1024.0);

        assert!(Grid::new(5).is_err());
    }

    #[test]
    fn nodes_strictly_increasing_and_exact_ends() {
        for n in [16, 100, 12288] {
            let g = Grid::new(n).unwrap();
            assert_eq!(g.node(0), 0.0);
            assert_eq!(g.node(n), 1.0);
            let xs: Vec<f64> = g.nodes().collect();
            assert!(xs.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn integrate_constant_and_affine() {
        let g = Grid::new(100).unwrap();
        let one = GridField::constant(g, 1.0);
        assert!((one.integrate() - 1.0).abs() <= 1e-15);

        let lin = GridField::from_fn(g, |x| x);
        assert!((lin.integrate() - 0.5).abs() <= 1e-14);
    }

    #[test]
    fn integrate_quadratic_second_order() {
        // ∫ x² = 1/3; trapezoid error is exactly h²/6 on this integrand.
        let g = Grid::new(1024).unwrap();
        let f = GridField::from_fn(g, |x| x * x);
        assert!((f.integrate() - 1.0 / 3.0).abs() <= 1e-6);

        let g2 = Grid::new(2048).unwrap();
        let f2 = GridField::from_fn(g2, |x| x * x);
        let e1 = (f.integrate() - 1.0 / 3.0).abs();
        let e2 = (f2.integrate() - 1.0 / 3.0).abs();
        assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5);
    }

    #[test]
    fn derivative_trivials() {
        let g = Grid::new(64).unwrap();
        let c = GridField::constant(g, 3.25);
        assert!(c.derivative().max_abs() <= 1e-12);

        let lin = GridField::from_fn(g, |x| x);
        let d = lin.derivative();
        for v in d.values() {
            assert!((v - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn derivative_sine_error_bound() {
        // Taylor bound (2π)³h²/6 ≈ 2.4e-5 at n=1024; the one-sided end
        // stencils stay within the same order.
        let g = Grid::new(1024).unwrap();
        let f = GridField::from_fn(g, |x| (2.0 * PI * x).sin());
        let d = f.derivative();
        let max_err = g
            .nodes()
            .zip(d.values())
            .map(|(x, v)| (v - 2.0 * PI * (2.0 * PI * x).cos()).abs())
            .fold(0.0_f64, f64::max);
        assert!(max_err <= 1e-4, "max derivative error {max_err}");
    }

    #[test]
    fn integrate_between_telescopes() {
        let g = Grid::new(257).unwrap();
        let f = GridField::from_fn(g, |x| (3.0 * x).cos() + 0.5 * x);
        let total = f.integrate();
        let cuts = [0.0, 0.121, 0.3337, 0.5, 0.74, 0.99, 1.0];
        let split: f64 = cuts.windows(2).map(|w| f.integrate_between(w[0], w[1])).sum();
        assert!((total - split).abs() <= 1e-13, "telescoping gap {}", total - split);
    }

    #[test]
    fn refinement_halves_error_quadratically() {
        // |I(n) - I(2n)| should shrink ≈4× per refinement on smooth data.
        let err = |n: usize| {
            let g = Grid::new(n).unwrap();
            let f = GridField::from_fn(g, |x| (2.0 * x).exp());
            f.integrate()
        };
        let d1 = (err(64) - err(128)).abs();
        let d2 = (err(128) - err(256)).abs();
        let ratio = d1 / d2;
        assert!(ratio > 3.5 && ratio < 4.5, "refinement ratio {ratio}");
    }

    #[test]
    fn cell_widths_match_quad_weights() {
        let g = Grid::new(100).unwrap();
        for i in 0..=g.n() {
            let (lo, hi) = g.cell(i);
            assert!((hi - lo - g.quad_weight(i)).abs() <= 1e-15);
        }
    }
}
