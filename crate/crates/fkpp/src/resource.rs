//! Exact piecewise-constant resource distributions.
//!
//! The control variable `m` lives here in breakpoint form: sorted breakpoints
//! `0 = b_0 < b_1 < … < b_J = L` with one value per piece, every value in
//! `[0, κ]`. Mass, total variation, and restriction/reflection/tiling are all
//! exact breakpoint arithmetic; grids only ever receive cell-averaged samples,
//! which keeps objectives second-order accurate even for bang-bang controls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{compensated_sum, Grid, GridField};

/// Relative slack when validating values against `[0, κ]`; anything inside
/// is clamped exactly onto the bound.
const VALUE_SLACK: f64 = 1e-9;

/// Piecewise-constant resource distribution on `[0, L]` (usually `L = 1`)
/// with values in `[0, kappa]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct ResourceProfile {
    kappa: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

/// Serialization shape: `{"kappa": κ, "breakpoints": [...], "values": [...]}`.
#[derive(Serialize, Deserialize)]
struct RawProfile {
    kappa: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawProfile> for ResourceProfile {
    type Error = String;

    fn try_from(raw: RawProfile) -> std::result::Result<Self, String> {
        ResourceProfile::new(raw.kappa, raw.breakpoints, raw.values).map_err(|e| e.to_string())
    }
}

impl From<ResourceProfile> for RawProfile {
    fn from(p: ResourceProfile) -> Self {
        RawProfile {
            kappa: p.kappa,
            breakpoints: p.breakpoints,
            values: p.values,
        }
    }
}

impl ResourceProfile {
    /// Builds a profile, dropping zero-width pieces and merging adjacent
    /// equal values so that every interior breakpoint is a genuine jump.
    pub fn new(kappa: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "kappa must be positive and finite, got {kappa}"
            )));
        }
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidInput(format!(
                "need one more breakpoint than values, got {} breakpoints and {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidInput(format!(
                "first breakpoint must be 0, got {}",
                breakpoints[0]
            )));
        }
        let end = *breakpoints.last().unwrap();
        if !end.is_finite() || end <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "last breakpoint must be positive and finite, got {end}"
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("breakpoints must be sorted".into()));
        }

        let slack = VALUE_SLACK * kappa.max(1.0);
        let mut bp = Vec::with_capacity(breakpoints.len());
        let mut vals = Vec::with_capacity(values.len());
        bp.push(0.0);
        for (j, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < -slack || v > kappa + slack {
                return Err(Error::InvalidInput(format!(
                    "value {v} outside [0, {kappa}]"
                )));
            }
            let v = v.clamp(0.0, kappa);
            let hi = breakpoints[j + 1];
            if hi <= *bp.last().unwrap() {
                continue; // zero-width piece
            }
            if vals.last() == Some(&v) {
                *bp.last_mut().unwrap() = hi; // merge equal run
            } else {
                bp.push(hi);
                vals.push(v);
            }
        }
        if vals.is_empty() {
            return Err(Error::InvalidInput("profile has no pieces".into()));
        }
        *bp.last_mut().unwrap() = end;
        Ok(Self {
            kappa,
            breakpoints: bp,
            values: vals,
        })
    }

    /// Constant resource `m ≡ value` on `[0, 1]`.
    pub fn constant(value: f64, kappa: f64) -> Result<Self> {
        Self::new(kappa, vec![0.0, 1.0], vec![value])
    }

    /// The crenel distribution: `κ` on `[0, ℓ]`, `0` on `(ℓ, 1]`.
    /// `ℓ = 0` is the zero resource and `ℓ = 1` the full one.
    pub fn crenel(ell: f64, kappa: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ell) {
            return Err(Error::InvalidInput(format!(
                "crenel length must be in [0, 1], got {ell}"
            )));
        }
        if ell <= 0.0 {
            Self::constant(0.0, kappa)
        } else if ell >= 1.0 {
            Self::constant(kappa, kappa)
        } else {
            Self::new(kappa, vec![0.0, ell, 1.0], vec![kappa, 0.0])
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// End of the domain (the last breakpoint).
    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Exact mass `∫ m`.
    pub fn mass(&self) -> f64 {
        self.integral_over(0.0, self.end())
    }

    /// Total variation `Σ |v_{j+1} − v_j|` over interior jumps. For
    /// bang-bang profiles this equals `κ · jump_count`; the normalization
    /// that assigns a crenel norm 1 is `total_variation / κ`.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Number of interior discontinuities.
    pub fn jump_count(&self) -> usize {
        self.values.len() - 1
    }

    /// Whether every value is within `tol` of `0` or `κ`.
    pub fn is_bang_bang(&self, tol: f64) -> bool {
        self.values
            .iter()
            .all(|&v| v.abs() <= tol || (v - self.kappa).abs() <= tol)
    }

    /// Right-continuous point evaluation (the last piece owns `x = end`).
    pub fn value_at(&self, x: f64) -> f64 {
        let j = self.breakpoints.partition_point(|&b| b <= x);
        self.values[j.saturating_sub(1).min(self.values.len() - 1)]
    }

    /// Exact `∫ₐᵇ m` from breakpoint arithmetic.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        let a = a.max(0.0);
        let b = b.min(self.end());
        if b <= a {
            return 0.0;
        }
        let start = self.breakpoints.partition_point(|&bp| bp <= a);
        let start = start.saturating_sub(1);
        let terms = (start..self.values.len())
            .take_while(|&j| self.breakpoints[j] < b)
            .map(|j| {
                let lo = self.breakpoints[j].max(a);
                let hi = self.breakpoints[j + 1].min(b);
                if hi > lo {
                    self.values[j] * (hi - lo)
                } else {
                    0.0
                }
            });
        compensated_sum(terms)
    }

    /// Breakpoints strictly inside `(a, b)`, i.e. the jump locations there.
    pub fn jumps_within(&self, a: f64, b: f64) -> Vec<f64> {
        self.breakpoints[1..self.breakpoints.len() - 1]
            .iter()
            .copied()
            .filter(|&x| x > a && x < b)
            .collect()
    }

    /// Cell-averaged nodal samples: node `i` carries the average of `m` over
    /// its cell, so integrating the sample with the matching trapezoidal
    /// weights reproduces the exact mass to a few ulps.
    pub fn sample(&self, grid: Grid) -> Result<GridField> {
        self.check_domain(grid.length())?;
        let values = (0..=grid.n())
            .map(|i| {
                let (lo, hi) = grid.cell(i);
                self.integral_over(lo, hi) / grid.quad_weight(i)
            })
            .collect();
        GridField::new(grid, values)
    }

    pub(crate) fn check_domain(&self, length: f64) -> Result<()> {
        if (self.end() - length).abs() > 1e-12 * length.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "profile domain [0, {}] does not match grid domain [0, {length}]",
                self.end()
            )));
        }
        Ok(())
    }

    /// Reflection `x ↦ end − x`.
    pub fn reflect(&self) -> Self {
        let end = self.end();
        let mut bp: Vec<f64> = self.breakpoints.iter().rev().map(|&b| end - b).collect();
        bp[0] = 0.0;
        *bp.last_mut().unwrap() = end;
        let values: Vec<f64> = self.values.iter().rev().copied().collect();
        Self::new(self.kappa, bp, values).expect("reflection preserves validity")
    }

    /// Restriction to `[a, b]` rescaled onto the unit interval; exact on
    /// breakpoints (used for pattern extraction).
    pub fn restrict_rescaled(&self, a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b <= self.end() && b > a) {
            return Err(Error::InvalidInput(format!(
                "bad restriction window [{a}, {b}]"
            )));
        }
        let width = b - a;
        let mut bp = vec![0.0];
        let mut vals = Vec::new();
        for j in 0..self.values.len() {
            let lo = self.breakpoints[j].max(a);
            let hi = self.breakpoints[j + 1].min(b);
            if hi > lo {
                bp.push((hi - a) / width);
                vals.push(self.values[j]);
            }
        }
        *bp.last_mut().unwrap() = 1.0;
        Self::new(self.kappa, bp, vals)
    }

    /// Same shape on `[0, new_end]` (breakpoints scaled linearly). Used for
    /// the dilation identity where `m(λ·)` lives on `[0, 1/λ]`.
    pub fn rescale_domain(&self, new_end: f64) -> Result<Self> {
        if !new_end.is_finite() || new_end <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "domain end must be positive, got {new_end}"
            )));
        }
        let scale = new_end / self.end();
        let mut bp: Vec<f64> = self.breakpoints.iter().map(|&b| b * scale).collect();
        bp[0] = 0.0;
        *bp.last_mut().unwrap() = new_end;
        Self::new(self.kappa, bp, self.values.clone())
    }

    /// Values (and the bound κ) multiplied by `factor > 0`. This is how the
    /// B-scaling identity evaluates `F_{Bμ}(Bm)` without breaking the
    /// per-profile bound.
    pub fn scale_values(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Self::new(
            self.kappa * factor,
            self.breakpoints.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// Profile from nodal values: piece `i` covers node `i`'s cell, with
    /// breakpoints at cell boundaries and equal runs merged. This is the
    /// exact inverse of [`sample`](Self::sample) for cell-aligned profiles.
    pub fn from_node_values(grid: Grid, nodal: &[f64], kappa: f64) -> Result<Self> {
        if nodal.len() != grid.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "need {} nodal values, got {}",
                grid.num_nodes(),
                nodal.len()
            )));
        }
        let n = grid.n();
        let two_n = (2 * n) as f64;
        let mut bp = Vec::with_capacity(n + 2);
        bp.push(0.0);
        for i in 0..n {
            bp.push(grid.length() * ((2 * i + 1) as f64 / two_n));
        }
        bp.push(grid.length());
        Self::new(kappa, bp, nodal.to_vec())
    }

    /// `L¹` distance on the common domain.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let cuts = merge_breakpoints(&[self, other]);
        compensated_sum(cuts.windows(2).map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (self.value_at(mid) - other.value_at(mid)).abs() * (w[1] - w[0])
        }))
    }

    /// Pointwise mean of profiles sharing a domain (used to average the
    /// folded cells in symmetry detection).
    pub fn average(profiles: &[&Self]) -> Result<Self> {
        let first = profiles
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot average zero profiles".into()))?;
        let cuts = merge_breakpoints(profiles);
        let inv = 1.0 / profiles.len() as f64;
        let values: Vec<f64> = cuts
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                profiles.iter().map(|p| p.value_at(mid)).sum::<f64>() * inv
            })
            .collect();
        Self::new(first.kappa, cuts, values)
    }
}

fn merge_breakpoints(profiles: &[&ResourceProfile]) -> Vec<f64> {
    let mut cuts: Vec<f64> = profiles
        .iter()
        .flat_map(|p| p.breakpoints.iter().copied())
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    cuts
}
