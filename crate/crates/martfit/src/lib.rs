//! Fitting martingales to a discrete set of marginal laws.
//!
//! The crate takes a time-indexed family of finite-atom marginals in
//! convex order, interpolates it to a full call surface by the extremal
//! construction, and samples martingale paths with exactly those
//! marginals through a max-ladder Skorokhod embedding. Around that core:
//! a validator for the convex-order conditions, statistical and exact
//! diagnostics on sampled paths, local-volatility extraction with an
//! Euler cross-check for smooth surfaces, a capped uniform metric between
//! surfaces, and scenario builders (gap, sticky, quantized Gaussian).

pub mod diagnostics;
pub mod error;
pub mod extremal;
pub mod io;
pub mod local_vol;
pub mod marginal;
pub mod metric;
pub mod rng;
pub mod scenario;
pub mod skorokhod;

pub use error::{MartfitError, Result};
pub use extremal::{extremal_chain, extremal_pair_call, BarrierFunctions, ExtremalSurface};
pub use marginal::{
    check_convex_order, Atom, CallSlice, CallSurface, GriddedSurface, MarginalDistribution,
};
pub use metric::metric_d;
pub use skorokhod::{exact_kernel, simulate_paths, SurfaceSampler};
