//! Scenario surfaces: structured transforms of a base surface and
//! quantization of continuous laws into the atomic representation.
//!
//! The gap transform empties the interval `(0, 1)` by splitting each
//! interior atom onto `{0, 1}` with the martingale weights, which turns
//! the call into the chord `(1-x) C(t,0) + x C(t,1)` there. The sticky
//! transform mixes each slice with the intrinsic call at zero,
//! `0.5 C(t,x) + 0.5 max(-x, 0)`, pinning half the mass at zero.
//! Quantization replaces each of `n` equal-probability quantile blocks
//! by its conditional mean, which preserves the overall mean exactly for
//! the supported families.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{MartfitError, Result};
use crate::marginal::{CallSurface, MarginalDistribution, PROB_TOL};

/// Push all mass in the open interval `(0, 1)` to its endpoints, atom by
/// atom with the martingale split. The output must still be a valid
/// surface; violations are errors, not repaired.
pub fn scenario_gap(base: &CallSurface) -> Result<CallSurface> {
    base.require_valid()?;
    let mut marginals = Vec::with_capacity(base.marginals().len());
    for m in base.marginals() {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for a in m.atoms() {
            if a.position > 0.0 && a.position < 1.0 {
                pairs.push((0.0, a.weight * (1.0 - a.position)));
                pairs.push((1.0, a.weight * a.position));
            } else {
                pairs.push((a.position, a.weight));
            }
        }
        marginals.push(MarginalDistribution::from_weighted(&pairs)?);
    }
    let out = CallSurface::new(base.times().to_vec(), marginals)?;
    out.require_valid()?;
    Ok(out)
}

/// Mix each slice with the intrinsic call at zero: half the mass sticks
/// at zero, the rest follows the base. Requires a centred base.
pub fn scenario_sticky(base: &CallSurface) -> Result<CallSurface> {
    base.require_valid()?;
    let mean = base.marginal(0).mean();
    if mean.abs() > PROB_TOL {
        return Err(MartfitError::Domain(format!(
            "sticky transform needs a centred base, mean is {mean}"
        )));
    }
    let mut marginals = Vec::with_capacity(base.marginals().len());
    for m in base.marginals() {
        let mut pairs: Vec<(f64, f64)> = m
            .atoms()
            .iter()
            .map(|a| (a.position, 0.5 * a.weight))
            .collect();
        pairs.push((0.0, 0.5));
        marginals.push(MarginalDistribution::from_weighted(&pairs)?);
    }
    let out = CallSurface::new(base.times().to_vec(), marginals)?;
    out.require_valid()?;
    Ok(out)
}

/// A continuous law with closed-form quantile-block means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousFamily {
    Normal { mean: f64, variance: f64 },
    Uniform { a: f64, b: f64 },
}

/// Replace each of `n` equal-probability quantile blocks by its
/// conditional mean.
pub fn quantize(family: ContinuousFamily, n_atoms: usize) -> Result<MarginalDistribution> {
    if n_atoms == 0 {
        return Err(MartfitError::Domain("need at least one atom".into()));
    }
    let n = n_atoms as f64;
    let w = 1.0 / n;
    let positions: Vec<f64> = match family {
        ContinuousFamily::Normal { mean, variance } => {
            if !(variance > 0.0) {
                return Err(MartfitError::Domain(format!(
                    "normal variance {variance} must be positive"
                )));
            }
            let std = Normal::new(0.0, 1.0).unwrap();
            let sd = variance.sqrt();
            // conditional mean over a quantile block [z_i, z_{i+1}] of the
            // standard normal is n (phi(z_i) - phi(z_{i+1}))
            let phi_at = |i: usize| {
                if i == 0 || i == n_atoms {
                    0.0
                } else {
                    std.pdf(std.inverse_cdf(i as f64 / n))
                }
            };
            (0..n_atoms)
                .map(|i| mean + sd * n * (phi_at(i) - phi_at(i + 1)))
                .collect()
        }
        ContinuousFamily::Uniform { a, b } => {
            if !(a < b) {
                return Err(MartfitError::Domain(format!(
                    "uniform bounds [{a}, {b}] are not increasing"
                )));
            }
            (0..n_atoms)
                .map(|i| a + (b - a) * (i as f64 + 0.5) / n)
                .collect()
        }
    };
    MarginalDistribution::from_weighted(&positions.iter().map(|&p| (p, w)).collect::<Vec<_>>())
}

/// Quantized centred Gaussian family `Normal(0, variance(t))` per time;
/// scaling a fixed quantized shape keeps the grid in convex order as long
/// as the variance is non-decreasing.
pub fn quantized_normal_surface(
    times: &[f64],
    variance: impl Fn(f64) -> f64,
    n_atoms: usize,
) -> Result<CallSurface> {
    let marginals = times
        .iter()
        .map(|&t| {
            quantize(
                ContinuousFamily::Normal {
                    mean: 0.0,
                    variance: variance(t),
                },
                n_atoms,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let out = CallSurface::new(times.to_vec(), marginals)?;
    out.require_valid()?;
    Ok(out)
}
