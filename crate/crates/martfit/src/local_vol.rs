//! Local-volatility extraction and an explicit SDE time-stepper.
//!
//! A smooth call surface determines a diffusion `dX = sigma(t, X) dB`
//! through the forward equation `dC/dt = 0.5 sigma^2 d2C/dx2`. On a
//! uniform lattice the coefficient is read off with central differences:
//!
//! ```text
//! sigma(t, x) = sqrt(2 dC/dt / d2C/dx2)
//! ```
//!
//! Cells where the curvature falls below a floor (vanishing density) or
//! where the extracted value blows up are masked rather than smoothed;
//! the Euler stepper fills masked cells from their nearest unmasked
//! neighbour. Simulating the diffusion and re-estimating calls gives an
//! independent round-trip check of any surface the rest of the crate
//! produces.

use rayon::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{MartfitError, Result};
use crate::marginal::{GriddedSurface, MarginalDistribution};
use crate::rng::CounterRng;

/// Curvature floor on `d2C/dx2` below which extraction is masked.
pub const CURVATURE_FLOOR: f64 = 1e-8;
/// Extracted values above this cap are masked.
pub const SIGMA_CAP: f64 = 1e3;
/// Negative time-derivatives within this tolerance are clamped to zero.
const TIME_SLOPE_TOL: f64 = 1e-12;

/// Extracted diffusion coefficient on the interior lattice of a
/// [`GriddedSurface`], with a mask for cells where extraction failed.
#[derive(Debug, Clone)]
pub struct LocalVolGrid {
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    /// Row-major `times.len() x levels.len()`; masked cells hold NaN.
    pub sigma: Vec<Vec<f64>>,
    pub mask: Vec<Vec<bool>>,
    /// Simulation span: the time bounds of the generating surface, one
    /// lattice step beyond the interior extraction lattice.
    pub t_span: (f64, f64),
}

impl LocalVolGrid {
    /// Constant coefficient on a given lattice, nothing masked.
    pub fn constant(times: Vec<f64>, levels: Vec<f64>, sigma: f64) -> Self {
        let row = vec![sigma; levels.len()];
        let mask = vec![vec![false; levels.len()]; times.len()];
        let t_span = (times[0], *times.last().unwrap());
        Self {
            sigma: vec![row; times.len()],
            times,
            levels,
            mask,
            t_span,
        }
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().flatten().filter(|&&m| m).count()
    }

    /// Sigma grid with every masked cell replaced by its nearest unmasked
    /// value (breadth-first over the lattice graph).
    fn filled(&self) -> Result<Vec<Vec<f64>>> {
        let (nt, nx) = (self.times.len(), self.levels.len());
        let mut out = self.sigma.clone();
        let mut dist = vec![vec![usize::MAX; nx]; nt];
        let mut queue = std::collections::VecDeque::new();
        for i in 0..nt {
            for j in 0..nx {
                if !self.mask[i][j] {
                    dist[i][j] = 0;
                    queue.push_back((i, j));
                }
            }
        }
        if queue.is_empty() {
            return Err(MartfitError::Domain(
                "local vol grid is fully masked".into(),
            ));
        }
        while let Some((i, j)) = queue.pop_front() {
            let neighbours = [
                (i.wrapping_sub(1), j),
                (i + 1, j),
                (i, j.wrapping_sub(1)),
                (i, j + 1),
            ];
            for (ni, nj) in neighbours {
                if ni < nt && nj < nx && dist[ni][nj] == usize::MAX {
                    dist[ni][nj] = dist[i][j] + 1;
                    out[ni][nj] = out[i][j];
                    queue.push_back((ni, nj));
                }
            }
        }
        Ok(out)
    }
}

fn require_uniform(axis: &[f64], name: &str) -> Result<f64> {
    let h = axis[1] - axis[0];
    for w in axis.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * (1.0 + h.abs()) {
            return Err(MartfitError::InvalidSurface(format!(
                "{name} lattice is not uniform"
            )));
        }
    }
    Ok(h)
}

/// Extract `sigma` on the interior lattice by central differences.
pub fn dupire_sigma(surface: &GriddedSurface) -> Result<LocalVolGrid> {
    let (nt, nx) = (surface.times.len(), surface.levels.len());
    if nt < 3 || nx < 3 {
        return Err(MartfitError::InvalidSurface(format!(
            "lattice too small for extraction: {nt} x {nx}, need 3 per axis"
        )));
    }
    let dt = require_uniform(&surface.times, "time")?;
    let dx = require_uniform(&surface.levels, "level")?;

    let times: Vec<f64> = surface.times[1..nt - 1].to_vec();
    let levels: Vec<f64> = surface.levels[1..nx - 1].to_vec();
    let mut sigma = vec![vec![f64::NAN; levels.len()]; times.len()];
    let mut mask = vec![vec![true; levels.len()]; times.len()];

    for i in 1..nt - 1 {
        for j in 1..nx - 1 {
            let c_t = (surface.values[i + 1][j] - surface.values[i - 1][j]) / (2.0 * dt);
            let c_xx = (surface.values[i][j + 1] - 2.0 * surface.values[i][j]
                + surface.values[i][j - 1])
                / (dx * dx);
            let c_t = if c_t < 0.0 && c_t >= -TIME_SLOPE_TOL {
                0.0
            } else {
                c_t
            };
            if c_t < 0.0 || c_xx < CURVATURE_FLOOR {
                continue;
            }
            let s = (2.0 * c_t / c_xx).sqrt();
            if s > SIGMA_CAP {
                continue;
            }
            sigma[i - 1][j - 1] = s;
            mask[i - 1][j - 1] = false;
        }
    }
    Ok(LocalVolGrid {
        times,
        levels,
        sigma,
        mask,
        t_span: (surface.times[0], surface.times[nt - 1]),
    })
}

fn bilinear(times: &[f64], levels: &[f64], grid: &[Vec<f64>], t: f64, x: f64) -> f64 {
    let locate = |axis: &[f64], v: f64| -> (usize, f64) {
        if v <= axis[0] {
            return (0, 0.0);
        }
        if v >= axis[axis.len() - 1] {
            return (axis.len() - 2, 1.0);
        }
        let k = match axis.binary_search_by(|p| p.total_cmp(&v)) {
            Ok(i) => i.min(axis.len() - 2),
            Err(i) => i - 1,
        };
        (k, (v - axis[k]) / (axis[k + 1] - axis[k]))
    };
    let (i, wt) = locate(times, t);
    let (j, wx) = locate(levels, x);
    let f00 = grid[i][j];
    let f01 = grid[i][j + 1];
    let f10 = grid[i + 1][j];
    let f11 = grid[i + 1][j + 1];
    (1.0 - wt) * ((1.0 - wx) * f00 + wx * f01) + wt * ((1.0 - wx) * f10 + wx * f11)
}

/// Explicit scheme `X <- X + sigma(t, X) sqrt(dt) N(0,1)` from the start
/// of the lattice span, recording each path at the query times.
///
/// Returns an `n_paths x query_times.len()` matrix. Deterministic per
/// `(seed, path)` regardless of worker count.
pub fn euler_simulate(
    vol: &LocalVolGrid,
    initial: &MarginalDistribution,
    n_paths: usize,
    seed: u64,
    query_times: &[f64],
    dt: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(MartfitError::Domain(format!("step size {dt} must be positive")));
    }
    if n_paths == 0 || query_times.is_empty() {
        return Err(MartfitError::Domain("need at least one path and one query time".into()));
    }
    let (t_start, t_end) = vol.t_span;
    for &q in query_times {
        if q < t_start - 1e-12 || q > t_end + 1e-12 {
            return Err(MartfitError::Domain(format!(
                "query time {q} outside lattice span [{t_start}, {t_end}]"
            )));
        }
    }
    for w in query_times.windows(2) {
        if !(w[0] < w[1]) {
            return Err(MartfitError::Domain(
                "query times must be strictly increasing".into(),
            ));
        }
    }
    let filled = vol.filled()?;

    (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut init_rng = CounterRng::new(seed, p as u64, 0);
            let mut x = initial.quantile(init_rng.next_uniform())?;
            let mut rng = CounterRng::new(seed, p as u64, 1);
            let mut t = t_start;
            let mut out = Vec::with_capacity(query_times.len());
            for &q in query_times {
                while t < q - 1e-12 {
                    let step = dt.min(q - t);
                    let s = bilinear(&vol.times, &vol.levels, &filled, t, x);
                    x += s * step.sqrt() * rng.next_standard_normal();
                    t += step;
                }
                out.push(x);
            }
            Ok(out)
        })
        .collect()
}

/// Call value `E (Z - x)_+` for `Z ~ Normal(0, variance)`.
pub fn normal_call(variance: f64, x: f64) -> f64 {
    assert!(variance > 0.0);
    let sd = variance.sqrt();
    let z = x / sd;
    let std = Normal::new(0.0, 1.0).unwrap();
    sd * std.pdf(z) - x * std.cdf(-z)
}

/// Lattice of calls of the centred Gaussian family with variance `v(t)`.
pub fn gaussian_surface(
    times: Vec<f64>,
    levels: Vec<f64>,
    variance: impl Fn(f64) -> f64,
) -> Result<GriddedSurface> {
    let values = times
        .iter()
        .map(|&t| {
            let v = variance(t);
            levels.iter().map(|&x| normal_call(v, x)).collect()
        })
        .collect();
    GriddedSurface::new(times, levels, values)
}
