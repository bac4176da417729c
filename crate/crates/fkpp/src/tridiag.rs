//! Direct tridiagonal solves with partial pivoting.
//!
//! Both the Newton linearization and the adjoint operator are tridiagonal
//! with the Neumann ghost rows folded in, so an O(n) pivoted elimination
//! (the classic `dgtsv` scheme, with the subdiagonal reused as fill-in
//! storage) is all the linear algebra this crate needs.

/// Tridiagonal system: `dl` is the subdiagonal (row `i+1`), `d` the
/// diagonal, `du` the superdiagonal (row `i`).
pub(crate) struct Tridiag {
    pub dl: Vec<f64>,
    pub d: Vec<f64>,
    pub du: Vec<f64>,
}

pub(crate) enum TridiagError {
    /// Pivot magnitude at the offending row fell below the rounding floor.
    Singular { row: usize, pivot: f64 },
}

impl Tridiag {
    pub fn order(&self) -> usize {
        self.d.len()
    }

    fn coeff_scale(&self) -> f64 {
        let m = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        m(&self.d).max(m(&self.dl)).max(m(&self.du))
    }

    /// Gaussian elimination with row interchanges; consumes the system.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>, TridiagError> {
        let n = self.order();
        debug_assert_eq!(b.len(), n);
        debug_assert_eq!(self.dl.len(), n - 1);
        debug_assert_eq!(self.du.len(), n - 1);

        // Anything below this is indistinguishable from an exactly singular
        // operator after n rounding steps.
        let pivot_floor = 64.0 * f64::EPSILON * self.coeff_scale() * (n as f64).sqrt();

        let d = &mut self.d;
        let dl = &mut self.dl; // becomes the second superdiagonal after a swap
        let du = &mut self.du;

        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                // no interchange
                if d[i].abs() <= pivot_floor {
                    return Err(TridiagError::Singular { row: i, pivot: d[i] });
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
                dl[i] = 0.0;
            } else {
                // interchange rows i and i+1
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i < n - 2 {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                } else {
                    dl[i] = 0.0;
                }
                du[i] = temp;
                let bt = b[i];
                b[i] = b[i + 1];
                b[i + 1] = bt - fact * b[i + 1];
            }
        }
        if d[n - 1].abs() <= pivot_floor {
            return Err(TridiagError::Singular {
                row: n - 1,
                pivot: d[n - 1],
            });
        }

        b[n - 1] /= d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
        }
        Ok(b)
    }
}

/// Discrete Neumann operator `−μ D² + diag(shift)` on `n + 1` nodes with
/// ghost-point reflection folded into the boundary rows.
pub(crate) fn neumann_operator(mu: f64, h: f64, shift: &[f64]) -> Tridiag {
    let n = shift.len() - 1;
    let w = mu / (h * h);
    let mut dl = vec![-w; n];
    let mut du = vec![-w; n];
    du[0] = -2.0 * w;
    dl[n - 1] = -2.0 * w;
    let d = shift.iter().map(|s| 2.0 * w + s).collect();
    Tridiag { dl, d, du }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(dl: &[f64], d: &[f64], du: &[f64], x: &[f64], b: &[f64]) -> f64 {
        let n = d.len();
        (0..n)
            .map(|i| {
                let mut r = d[i] * x[i] - b[i];
                if i > 0 {
                    r += dl[i - 1] * x[i - 1];
                }
                if i < n - 1 {
                    r += du[i] * x[i + 1];
                }
                r.abs()
            })
            .fold(0.0_f64, f64::max)
    }

    #[test]
    fn solves_diagonally_dominant_system() {
        let n = 257;
        let dl = vec![-1.0; n - 1];
        let du = vec![-1.0; n - 1];
        let d = vec![2.5; n];
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let x = Tridiag {
            dl: dl.clone(),
            d: d.clone(),
            du: du.clone(),
        }
        .solve(b.clone())
        .map_err(|_| ())
        .unwrap();
        assert!(residual(&dl, &d, &du, &x, &b) <= 1e-12);
    }

    #[test]
    fn pivoting_handles_small_diagonal() {
        // leading diagonal entry far smaller than the subdiagonal
        let dl = vec![1.0, 1.0];
        let d = vec![1e-30, 1.0, 2.0];
        let du = vec![1.0, 1.0];
        let b = vec![1.0, 2.0, 3.0];
        let x = Tridiag {
            dl: dl.clone(),
            d: d.clone(),
            du: du.clone(),
        }
        .solve(b.clone())
        .map_err(|_| ())
        .unwrap();
        assert!(residual(&dl, &d, &du, &x, &b) <= 1e-12);
    }

    #[test]
    fn detects_singular_neumann_laplacian() {
        // −μ D² with Neumann rows annihilates constants; the elimination
        // must flag it rather than return garbage.
        let shift = vec![0.0; 65];
        let sys = neumann_operator(0.1, 1.0 / 64.0, &shift);
        assert!(sys.solve(vec![1.0; 65]).is_err());
    }

    #[test]
    fn neumann_operator_annihilates_constants_before_shift() {
        let shift = vec![3.0; 33];
        let sys = neumann_operator(0.7, 1.0 / 32.0, &shift);
        // (−μD² + 3I)·1 = 3 exactly, including the ghost rows
        let n = sys.order();
        for i in 0..n {
            let mut row = sys.d[i];
            if i > 0 {
                row += sys.dl[i - 1];
            }
            if i < n - 1 {
                row += sys.du[i];
            }
            assert!((row - 3.0).abs() <= 1e-9, "row {i} sums to {row}");
        }
    }
}
