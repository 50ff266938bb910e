//! Marginal distributions, call slices and call surfaces.
//!
//! A marginal is a finite list of atoms `(position, weight)`. Its dual
//! representation is the call function `C(x) = sum_i w_i (p_i - x)_+`,
//! a convex, non-increasing, piecewise-linear function with one-sided
//! slopes in `[-1, 0]`. A surface is a strictly increasing time grid with
//! one marginal per time; membership of the space of admissible surfaces
//! requires equal means and convex order across the grid.

use crate::error::{MartfitError, Result};

/// Tolerance for probability and mean normalization checks.
pub const PROB_TOL: f64 = 1e-9;
/// Tolerance for call-value comparisons.
pub const CALL_TOL: f64 = 1e-12;

/// One atom of a finite distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub weight: f64,
}

/// A finite-atom probability law on the reals.
///
/// Invariants: positions strictly increasing, weights positive and summing
/// to one within [`PROB_TOL`], finite mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDistribution {
    atoms: Vec<Atom>,
}

impl MarginalDistribution {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(MartfitError::InvalidMarginal("no atoms".into()));
        }
        let mut total = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if !a.position.is_finite() {
                return Err(MartfitError::InvalidMarginal(format!(
                    "non-finite position at atom {i}"
                )));
            }
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(MartfitError::InvalidMarginal(format!(
                    "non-positive weight {} at atom {i}",
                    a.weight
                )));
            }
            if i > 0 && !(atoms[i - 1].position < a.position) {
                return Err(MartfitError::InvalidMarginal(format!(
                    "positions not strictly increasing at atom {i}"
                )));
            }
            total += a.weight;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(MartfitError::InvalidMarginal(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// Point mass at `x`.
    pub fn dirac(x: f64) -> Self {
        Self {
            atoms: vec![Atom {
                position: x,
                weight: 1.0,
            }],
        }
    }

    /// Build from possibly unsorted `(position, weight)` pairs, merging
    /// atoms at identical positions and dropping zero weights.
    pub fn from_weighted(pairs: &[(f64, f64)]) -> Result<Self> {
        let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<Atom> = Vec::new();
        for (p, w) in sorted {
            if w == 0.0 {
                continue;
            }
            match atoms.last_mut() {
                Some(last) if last.position == p => last.weight += w,
                _ => atoms.push(Atom {
                    position: p,
                    weight: w,
                }),
            }
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Mean of the law.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.position * a.weight).sum()
    }

    /// Call value `C(x) = sum_i w_i (p_i - x)_+`.
    pub fn call(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * (a.position - x).max(0.0))
            .sum()
    }

    /// Right-continuous CDF: mass on `(-inf, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for a in &self.atoms {
            if a.position <= x {
                acc += a.weight;
            } else {
                break;
            }
        }
        acc
    }

    /// Left-continuous generalized inverse `inf { x : F(x) >= u }`, `u` in
    /// `(0, 1]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(MartfitError::Domain(format!(
                "quantile level {u} outside (0, 1]"
            )));
        }
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.weight;
            if acc >= u - CALL_TOL {
                return Ok(a.position);
            }
        }
        // float undershoot of the cumulative sum
        Ok(self.atoms.last().unwrap().position)
    }

    /// Cumulative weight levels `u_1 < ... < u_m = 1` of the atoms.
    pub fn cumulative_weights(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            acc += a.weight;
            out.push(acc);
        }
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    }

    pub fn min_position(&self) -> f64 {
        self.atoms.first().unwrap().position
    }

    pub fn max_position(&self) -> f64 {
        self.atoms.last().unwrap().position
    }

    pub fn to_slice(&self) -> CallSlice {
        CallSlice {
            mean: self.mean(),
            kinks: self.atoms.clone(),
        }
    }
}

/// The convex function `x -> C(x)` at one time, represented by its kinks.
#[derive(Debug, Clone, PartialEq)]
pub struct CallSlice {
    mean: f64,
    kinks: Vec<Atom>,
}

impl CallSlice {
    pub fn new(mean: f64, kinks: Vec<Atom>) -> Result<Self> {
        let slice = Self { mean, kinks };
        slice.validate()?;
        Ok(slice)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn kinks(&self) -> &[Atom] {
        &self.kinks
    }

    /// `C(x) = sum_i m_i (p_i - x)_+`.
    pub fn eval(&self, x: f64) -> f64 {
        self.kinks
            .iter()
            .map(|a| a.weight * (a.position - x).max(0.0))
            .sum()
    }

    /// Right slope of the piecewise-linear call at `x`.
    pub fn slope_right(&self, x: f64) -> f64 {
        // slope on (p_k, p_{k+1}) is F(p_k) - 1
        let mut below = 0.0;
        for a in &self.kinks {
            if a.position <= x {
                below += a.weight;
            } else {
                break;
            }
        }
        below - 1.0
    }

    /// Left slope of the piecewise-linear call at `x`.
    pub fn slope_left(&self, x: f64) -> f64 {
        let mut below = 0.0;
        for a in &self.kinks {
            if a.position < x {
                below += a.weight;
            } else {
                break;
            }
        }
        below - 1.0
    }

    fn validate(&self) -> Result<()> {
        if self.kinks.is_empty() {
            return Err(MartfitError::InvalidSlice("no kinks".into()));
        }
        for (i, a) in self.kinks.iter().enumerate() {
            if i > 0 && !(self.kinks[i - 1].position < a.position) {
                return Err(MartfitError::InvalidSlice(
                    "kink positions not strictly increasing".into(),
                ));
            }
            if !(a.weight > 0.0) {
                // a non-positive slope jump means a non-convex call
                return Err(MartfitError::InvalidSlice(format!(
                    "non-convex: slope jump {} at kink {i}",
                    a.weight
                )));
            }
        }
        let total: f64 = self.kinks.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(MartfitError::InvalidSlice(format!(
                "slopes leave [-1, 0]: total slope jump {total}"
            )));
        }
        let implied: f64 = self.kinks.iter().map(|a| a.weight * a.position).sum();
        if (implied - self.mean).abs() > PROB_TOL {
            return Err(MartfitError::InvalidSlice(format!(
                "mean {} inconsistent with kinks (implied {implied})",
                self.mean
            )));
        }
        Ok(())
    }
}

/// Recover the marginal from a call slice: atoms at slope-change points
/// with mass equal to the slope jump.
pub fn marginal_from_call_slice(slice: &CallSlice) -> Result<MarginalDistribution> {
    slice.validate()?;
    let atoms: Vec<Atom> = slice
        .kinks
        .iter()
        .map(|a| Atom {
            position: a.position,
            weight: slice.slope_right(a.position) - slice.slope_left(a.position),
        })
        .collect();
    MarginalDistribution::new(atoms)
}

/// Call value of a marginal at a level.
pub fn call_from_marginal(dist: &MarginalDistribution, x: f64) -> f64 {
    dist.call(x)
}

/// True iff `lo <= hi` in the convex order: equal means within [`PROB_TOL`]
/// and `C_lo <= C_hi` at every kink position of either.
pub fn check_convex_order(lo: &MarginalDistribution, hi: &MarginalDistribution) -> bool {
    if (lo.mean() - hi.mean()).abs() > PROB_TOL {
        return false;
    }
    lo.atoms
        .iter()
        .chain(hi.atoms.iter())
        .all(|a| lo.call(a.position) <= hi.call(a.position) + CALL_TOL)
}

/// One violated surface condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Index of the offending grid block (or the later block of a pair).
    pub block: usize,
    pub message: String,
}

/// Result of CP-membership validation. Empty iff the surface is valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            writeln!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "block {}: {}", v.block, v.message)?;
            }
            Ok(())
        }
    }
}

/// A time-indexed family of marginals on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct CallSurface {
    times: Vec<f64>,
    marginals: Vec<MarginalDistribution>,
}

impl CallSurface {
    /// Structural construction; CP membership is checked by
    /// [`CallSurface::validate_cp`].
    pub fn new(times: Vec<f64>, marginals: Vec<MarginalDistribution>) -> Result<Self> {
        if times.is_empty() || times.len() != marginals.len() {
            return Err(MartfitError::InvalidSurface(format!(
                "{} times for {} marginals",
                times.len(),
                marginals.len()
            )));
        }
        for (i, t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(MartfitError::InvalidSurface(format!(
                    "non-finite time at block {i}"
                )));
            }
            if i > 0 && !(times[i - 1] < *t) {
                return Err(MartfitError::InvalidSurface(format!(
                    "times not strictly increasing at block {i}"
                )));
            }
        }
        Ok(Self { times, marginals })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn marginals(&self) -> &[MarginalDistribution] {
        &self.marginals
    }

    pub fn marginal(&self, k: usize) -> &MarginalDistribution {
        &self.marginals[k]
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Check the CP conditions on the grid: equal means, convex order
    /// (monotone calls in time), weight normalization. Violations are
    /// collected, not raised.
    pub fn validate_cp(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mean0 = self.marginals[0].mean();
        for (k, m) in self.marginals.iter().enumerate() {
            let total: f64 = m.atoms().iter().map(|a| a.weight).sum();
            if (total - 1.0).abs() > PROB_TOL {
                report.violations.push(Violation {
                    block: k,
                    message: format!("weights sum to {total}"),
                });
            }
            if (m.mean() - mean0).abs() > PROB_TOL {
                report.violations.push(Violation {
                    block: k,
                    message: format!("means differ: {} vs {}", m.mean(), mean0),
                });
            }
        }
        for k in 1..self.marginals.len() {
            let lo = &self.marginals[k - 1];
            let hi = &self.marginals[k];
            let decreasing = lo
                .atoms()
                .iter()
                .chain(hi.atoms().iter())
                .any(|a| lo.call(a.position) > hi.call(a.position) + CALL_TOL);
            if decreasing {
                report.violations.push(Violation {
                    block: k,
                    message: "call decreasing in t (convex order violated)".into(),
                });
            }
        }
        report
    }

    /// Error unless [`CallSurface::validate_cp`] is clean.
    pub fn require_valid(&self) -> Result<()> {
        let report = self.validate_cp();
        if report.is_valid() {
            Ok(())
        } else {
            Err(MartfitError::InvalidSurface(format!("{report}")))
        }
    }
}

/// A lattice of call values `C(t_i, x_j)` for the smooth-surface tooling.
#[derive(Debug, Clone)]
pub struct GriddedSurface {
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    /// Row-major `times.len() x levels.len()`.
    pub values: Vec<Vec<f64>>,
}

impl GriddedSurface {
    pub fn new(times: Vec<f64>, levels: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() || values.iter().any(|r| r.len() != levels.len()) {
            return Err(MartfitError::InvalidSurface(
                "gridded surface shape mismatch".into(),
            ));
        }
        for w in times.windows(2) {
            if !(w[0] < w[1]) {
                return Err(MartfitError::InvalidSurface(
                    "time lattice not strictly increasing".into(),
                ));
            }
        }
        for w in levels.windows(2) {
            if !(w[0] < w[1]) {
                return Err(MartfitError::InvalidSurface(
                    "level lattice not strictly increasing".into(),
                ));
            }
        }
        let surf = Self {
            times,
            levels,
            values,
        };
        surf.check_shape_invariants()?;
        Ok(surf)
    }

    fn check_shape_invariants(&self) -> Result<()> {
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v >= -PROB_TOL) || !v.is_finite() {
                    return Err(MartfitError::InvalidSurface(format!(
                        "negative or non-finite call {v} at cell ({i},{j})"
                    )));
                }
                if i > 0 && self.values[i - 1][j] > v + PROB_TOL {
                    return Err(MartfitError::InvalidSurface(format!(
                        "call decreasing in t at cell ({i},{j})"
                    )));
                }
            }
        }
        // discrete convexity in x
        for (i, row) in self.values.iter().enumerate() {
            for j in 1..row.len().saturating_sub(1) {
                let dl = self.levels[j] - self.levels[j - 1];
                let dr = self.levels[j + 1] - self.levels[j];
                let left = (row[j] - row[j - 1]) / dl;
                let right = (row[j + 1] - row[j]) / dr;
                if left > right + PROB_TOL {
                    return Err(MartfitError::InvalidSurface(format!(
                        "not convex in x at cell ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }
}
