//! Exact path sampling through the max-ladder Skorokhod embedding.
//!
//! Per grid interval the embedding barrier `b(s) = beta(F*(s))` of the
//! running maximum is a step function whose values are atoms of the upper
//! marginal. Sampling a transition reduces to sequential fair two-point
//! bets: from a running max `s` over barrier `b`, the max reaches the next
//! rung `r` before ruin with probability `(s - b) / (r - b)`. On ruin the
//! terminal max is drawn exactly by inverse transform from the
//! first-passage identity, and the landing level is the rung barrier.
//! No Brownian path is ever discretized.

use rayon::prelude::*;

use crate::error::{MartfitError, Result};
use crate::extremal::BarrierFunctions;
use crate::marginal::{CallSurface, MarginalDistribution, PROB_TOL};
use crate::rng::CounterRng;

/// One constant stretch of the barrier: active while the running max is in
/// `[lo, hi)`; ruin drops the path to `barrier`.
#[derive(Debug, Clone, Copy)]
pub struct Rung {
    pub lo: f64,
    pub hi: f64,
    pub barrier: f64,
}

/// Per-interval embedding data.
#[derive(Debug, Clone)]
pub struct TransitionBarrier {
    functions: BarrierFunctions,
    rungs: Vec<Rung>,
    /// Smallest rung boundary at which the barrier meets the diagonal.
    stop_level: f64,
}

/// One simulated transition in closed form.
#[derive(Debug, Clone, Copy)]
pub struct PathSample {
    /// Start level (an atom of the lower marginal, or a previous landing).
    pub start: f64,
    /// Terminal running max.
    pub terminal_max: f64,
    /// Landing level (an atom of the upper marginal).
    pub landing: f64,
    /// `F*(terminal_max)`: interior fraction at which the path jumps.
    pub jump_u: f64,
    /// Absolute jump time `t0 + (t1 - t0) * jump_u`.
    pub jump_time: f64,
}

/// Build the per-interval barrier. Errors on convex-order failure and on
/// non-monotone interpolation data.
pub fn build_barrier(
    lower: &MarginalDistribution,
    upper: &MarginalDistribution,
    t0: f64,
    t1: f64,
) -> Result<TransitionBarrier> {
    let functions = BarrierFunctions::new(lower, upper, t0, t1)?;
    let atoms = upper.atoms();
    let breakpoints = functions.breakpoints().to_vec();

    // rung boundaries are alpha at the cumulative-weight levels; the
    // barrier below the k-th boundary is the k-th upper atom
    let mut rungs: Vec<Rung> = Vec::new();
    let mut lo = f64::NEG_INFINITY;
    for (k, atom) in atoms.iter().enumerate() {
        let hi = functions.alpha(breakpoints[k + 1])?;
        if hi > lo {
            rungs.push(Rung {
                lo,
                hi,
                barrier: atom.position,
            });
            lo = hi;
        }
    }

    let mut barrier = TransitionBarrier {
        functions,
        rungs,
        stop_level: upper.max_position(),
    };
    for rung in &barrier.rungs {
        if rung.lo.is_finite() && barrier.stopped_at(rung.lo) {
            barrier.stop_level = rung.lo;
            break;
        }
    }
    // below the stop region the barrier must sit weakly under the diagonal
    for rung in &barrier.rungs {
        if rung.lo.is_finite() && rung.lo < barrier.stop_level && rung.barrier > rung.lo + PROB_TOL
        {
            return Err(MartfitError::Internal(format!(
                "barrier {} above running max {} below the stop region",
                rung.barrier, rung.lo
            )));
        }
    }
    Ok(barrier)
}

impl TransitionBarrier {
    pub fn interval(&self) -> (f64, f64) {
        self.functions.interval()
    }

    pub fn functions(&self) -> &BarrierFunctions {
        &self.functions
    }

    pub fn rungs(&self) -> &[Rung] {
        &self.rungs
    }

    pub fn stop_level(&self) -> f64 {
        self.stop_level
    }

    /// Barrier value for a running max `s`: `beta(F*(s))`, extended to the
    /// bottom of the upper support where `F* = 0`.
    pub fn barrier_at(&self, s: f64) -> f64 {
        let u = self.functions.fstar(s);
        if u <= 0.0 {
            self.functions.upper().min_position()
        } else {
            self.functions.upper().quantile(u).unwrap()
        }
    }

    /// The embedding stops once the path sits on the barrier of its own max.
    pub fn stopped_at(&self, s: f64) -> bool {
        s <= self.barrier_at(s)
    }

    fn rung_index(&self, s: f64) -> usize {
        // last rung with lo <= s; rung his are increasing
        match self
            .rungs
            .binary_search_by(|r| r.hi.total_cmp(&s))
        {
            Ok(i) => i + 1,
            Err(i) => i,
        }
        .min(self.rungs.len() - 1)
    }

    /// Jump time for a terminal max: `t0 + (t1 - t0) * F*(s)`.
    pub fn jump_time_of(&self, s_star: f64) -> f64 {
        let (t0, t1) = self.interval();
        t0 + (t1 - t0) * self.functions.fstar(s_star)
    }

    fn stopped_sample(&self, x0: f64) -> PathSample {
        PathSample {
            start: x0,
            terminal_max: x0,
            landing: x0,
            jump_u: 0.0,
            jump_time: self.interval().0,
        }
    }

    fn finish(&self, x0: f64, s_star: f64, landing: f64) -> PathSample {
        let jump_u = self.functions.fstar(s_star);
        PathSample {
            start: x0,
            terminal_max: s_star,
            landing,
            jump_u,
            jump_time: self.jump_time_of(s_star),
        }
    }
}

/// Sample one transition by sequential gambler's-ruin steps.
pub fn sample_transition(
    barrier: &TransitionBarrier,
    x0: f64,
    rng: &mut CounterRng,
) -> Result<PathSample> {
    if barrier.stopped_at(x0) {
        return Ok(barrier.stopped_sample(x0));
    }
    let mut s = x0;
    let mut idx = barrier.rung_index(x0);
    loop {
        let rung = barrier.rungs[idx];
        let b = rung.barrier;
        if b > s + PROB_TOL {
            return Err(MartfitError::Internal(format!(
                "start {s} below barrier {b}: malformed barrier"
            )));
        }
        let r = rung.hi;
        let p_survive = ((s - b) / (r - b)).clamp(0.0, 1.0);
        if rng.next_uniform() < p_survive {
            s = r;
            // absorption can happen at intermediate frozen atoms, not just
            // at the top of the ladder, so ask the barrier each time
            if barrier.stopped_at(s) {
                return Ok(barrier.finish(x0, s, s));
            }
            idx += 1;
        } else {
            // exact within-rung max given ruin
            let v = rng.next_uniform();
            let s_star = b + (s - b) / (p_survive + (1.0 - p_survive) * v);
            return Ok(barrier.finish(x0, s_star.clamp(s, r), b));
        }
    }
}

/// Exact landing law from a start level: multiply rung survival
/// probabilities. Analytic oracle for the sampler; no randomness.
pub fn exact_kernel(barrier: &TransitionBarrier, x0: f64) -> Result<MarginalDistribution> {
    if barrier.stopped_at(x0) {
        return Ok(MarginalDistribution::dirac(x0));
    }
    let mut landings: Vec<(f64, f64)> = Vec::new();
    let mut s = x0;
    let mut mass = 1.0;
    let mut idx = barrier.rung_index(x0);
    loop {
        let rung = barrier.rungs[idx];
        let b = rung.barrier;
        if b > s + PROB_TOL {
            return Err(MartfitError::Internal(format!(
                "start {s} below barrier {b}: malformed barrier"
            )));
        }
        let r = rung.hi;
        let p_survive = ((s - b) / (r - b)).clamp(0.0, 1.0);
        if 1.0 - p_survive > 0.0 {
            landings.push((b, mass * (1.0 - p_survive)));
        }
        mass *= p_survive;
        s = r;
        if barrier.stopped_at(s) {
            if mass > 0.0 {
                landings.push((s, mass));
            }
            break;
        }
        idx += 1;
    }
    MarginalDistribution::from_weighted(&landings)
}

/// Closed-form path value of a sampled transition at `t` in the interval.
pub fn path_value(path: &PathSample, barrier: &TransitionBarrier, t: f64) -> Result<f64> {
    let (t0, t1) = barrier.interval();
    if t < t0 || t > t1 {
        return Err(MartfitError::Domain(format!(
            "time {t} outside [{t0}, {t1}]"
        )));
    }
    if t >= path.jump_time {
        return Ok(path.landing);
    }
    let u = barrier.functions().fraction(t);
    Ok(path.start.max(barrier.functions().ceiling(u)?))
}

/// Left limit of the path value at `t`; differs from [`path_value`] only
/// at the jump instant.
pub fn path_left_limit(path: &PathSample, barrier: &TransitionBarrier, t: f64) -> Result<f64> {
    let (t0, t1) = barrier.interval();
    if t < t0 || t > t1 {
        return Err(MartfitError::Domain(format!(
            "time {t} outside [{t0}, {t1}]"
        )));
    }
    if t > path.jump_time || (t == path.jump_time && t == t0) {
        return Ok(path.landing);
    }
    // at the jump instant the pre-jump value sits on the ceiling
    // (alpha(F*(s*)) = terminal max); evaluating through the ceiling keeps
    // coincident paths bitwise equal, which the crossing test compares
    // exactly
    let u = barrier.functions().fraction(t);
    Ok(path.start.max(barrier.functions().ceiling(u)?))
}

/// A full simulated path over all grid intervals.
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    pub start: f64,
    pub transitions: Vec<PathSample>,
}

impl SimulatedPath {
    /// Value at any time within the surface span, given the barriers the
    /// path was simulated against.
    pub fn value_at(&self, barriers: &[TransitionBarrier], t: f64) -> Result<f64> {
        debug_assert_eq!(barriers.len(), self.transitions.len());
        if barriers.is_empty() {
            return Ok(self.start);
        }
        let first_t0 = barriers[0].interval().0;
        if t <= first_t0 {
            return Ok(self.start);
        }
        for (tr, bar) in self.transitions.iter().zip(barriers) {
            let (_, t1) = bar.interval();
            if t <= t1 {
                return path_value(tr, bar, t);
            }
        }
        Ok(self.transitions.last().unwrap().landing)
    }
}

/// Chained simulation machinery for a surface: barriers per grid interval.
pub struct SurfaceSampler {
    surface: CallSurface,
    barriers: Vec<TransitionBarrier>,
}

impl SurfaceSampler {
    pub fn new(surface: &CallSurface) -> Result<Self> {
        surface.require_valid()?;
        let times = surface.times();
        let mut barriers = Vec::with_capacity(times.len().saturating_sub(1));
        for k in 1..times.len() {
            barriers.push(build_barrier(
                surface.marginal(k - 1),
                surface.marginal(k),
                times[k - 1],
                times[k],
            )?);
        }
        Ok(Self {
            surface: surface.clone(),
            barriers,
        })
    }

    pub fn barriers(&self) -> &[TransitionBarrier] {
        &self.barriers
    }

    pub fn surface(&self) -> &CallSurface {
        &self.surface
    }

    /// Simulate one path keyed by `(seed, path index)`: the start atom is
    /// drawn by inverse transform from the first marginal, then each
    /// interval transition chains from the previous landing.
    pub fn sample_path(&self, seed: u64, path_index: u64) -> Result<SimulatedPath> {
        let mut rng = CounterRng::new(seed, path_index, 0);
        let start = self.surface.marginal(0).quantile(rng.next_uniform())?;
        let mut transitions = Vec::with_capacity(self.barriers.len());
        let mut x = start;
        for (k, barrier) in self.barriers.iter().enumerate() {
            let mut rng = CounterRng::new(seed, path_index, k as u64 + 1);
            let tr = sample_transition(barrier, x, &mut rng)?;
            x = tr.landing;
            transitions.push(tr);
        }
        Ok(SimulatedPath { start, transitions })
    }

    /// Simulate `n_paths` paths and evaluate them at `query_times`.
    /// Bitwise deterministic in `(seed, n_paths)`, independent of worker
    /// count and query-time ordering.
    pub fn simulate(
        &self,
        n_paths: usize,
        seed: u64,
        query_times: &[f64],
    ) -> Result<Vec<Vec<f64>>> {
        if query_times.is_empty() {
            return Err(MartfitError::Domain("empty query-time list".into()));
        }
        let (lo, hi) = (self.surface.first_time(), self.surface.last_time());
        for &t in query_times {
            if t < lo || t > hi {
                return Err(MartfitError::Domain(format!(
                    "query time {t} outside [{lo}, {hi}]"
                )));
            }
        }
        (0..n_paths as u64)
            .into_par_iter()
            .map(|i| {
                let path = self.sample_path(seed, i)?;
                query_times
                    .iter()
                    .map(|&t| path.value_at(&self.barriers, t))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect()
    }

    /// Simulate full closed-form paths (for analytic diagnostics).
    pub fn sample_paths(&self, n_paths: usize, seed: u64) -> Result<Vec<SimulatedPath>> {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|i| self.sample_path(seed, i))
            .collect()
    }
}

/// Convenience wrapper building the sampler and producing the path matrix.
pub fn simulate_paths(
    surface: &CallSurface,
    n_paths: usize,
    seed: u64,
    query_times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    SurfaceSampler::new(surface)?.simulate(n_paths, seed, query_times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginal::check_convex_order;

    fn dirac0() -> MarginalDistribution {
        MarginalDistribution::dirac(0.0)
    }

    fn pair_a() -> MarginalDistribution {
        MarginalDistribution::from_weighted(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn pair_b() -> MarginalDistribution {
        MarginalDistribution::from_weighted(&[(-1.0, 1.0 / 3.0), (0.0, 1.0 / 3.0), (1.0, 1.0 / 3.0)])
            .unwrap()
    }

    fn assert_dist_eq(got: &MarginalDistribution, want: &[(f64, f64)], tol: f64) {
        assert_eq!(got.atoms().len(), want.len(), "{got:?} vs {want:?}");
        for (a, (p, w)) in got.atoms().iter().zip(want) {
            assert!((a.position - p).abs() <= tol, "{got:?} vs {want:?}");
            assert!((a.weight - w).abs() <= tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn barrier_pair_a() {
        let bar = build_barrier(&dirac0(), &pair_a(), 0.0, 1.0).unwrap();
        assert_eq!(bar.stop_level(), 1.0);
        assert_eq!(bar.barrier_at(0.0), -1.0);
        assert_eq!(bar.barrier_at(0.9), -1.0);
        assert!(bar.stopped_at(1.0));
    }

    #[test]
    fn barrier_pair_b() {
        let bar = build_barrier(&dirac0(), &pair_b(), 0.0, 1.0).unwrap();
        assert_eq!(bar.stop_level(), 1.0);
        assert_eq!(bar.barrier_at(0.25), -1.0);
        // rung boundary at 1/2 switches the ruin target to 0
        let idx = bar.rung_index(0.5);
        assert_eq!(bar.rungs()[idx].barrier, 0.0);
        assert!((bar.rungs()[idx].lo - 0.5).abs() < 1e-12);
    }

    #[test]
    fn barrier_identical_marginals_stops_everywhere() {
        let bar = build_barrier(&pair_b(), &pair_b(), 0.0, 1.0).unwrap();
        for x in [-1.0, 0.0, 1.0] {
            assert!(bar.stopped_at(x), "x = {x}");
            let k = exact_kernel(&bar, x).unwrap();
            assert_dist_eq(&k, &[(x, 1.0)], 0.0);
        }
    }

    #[test]
    fn kernel_pair_a() {
        let bar = build_barrier(&dirac0(), &pair_a(), 0.0, 1.0).unwrap();
        let k = exact_kernel(&bar, 0.0).unwrap();
        assert_dist_eq(&k, &[(-1.0, 0.5), (1.0, 0.5)], 1e-15);
    }

    #[test]
    fn kernel_pair_b() {
        let bar = build_barrier(&dirac0(), &pair_b(), 0.0, 1.0).unwrap();
        let k = exact_kernel(&bar, 0.0).unwrap();
        assert_dist_eq(
            &k,
            &[(-1.0, 1.0 / 3.0), (0.0, 1.0 / 3.0), (1.0, 1.0 / 3.0)],
            1e-12,
        );
    }

    #[test]
    fn kernel_partial_spread() {
        // only the upper half of the mass spreads; the atom at -1 is frozen
        let lower = MarginalDistribution::from_weighted(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let upper =
            MarginalDistribution::from_weighted(&[(-1.0, 0.5), (0.0, 0.25), (2.0, 0.25)]).unwrap();
        assert!(check_convex_order(&lower, &upper));
        let bar = build_barrier(&lower, &upper, 0.0, 1.0).unwrap();
        assert_dist_eq(&exact_kernel(&bar, -1.0).unwrap(), &[(-1.0, 1.0)], 1e-12);
        assert_dist_eq(
            &exact_kernel(&bar, 1.0).unwrap(),
            &[(0.0, 0.5), (2.0, 0.5)],
            1e-12,
        );
    }

    #[test]
    fn kernel_mixture_reproduces_upper() {
        let cases = vec![
            (dirac0(), pair_a()),
            (dirac0(), pair_b()),
            (pair_a(), pair_b_spread()),
        ];
        for (lower, upper) in cases {
            let bar = build_barrier(&lower, &upper, 0.0, 1.0).unwrap();
            let mut mix: Vec<(f64, f64)> = Vec::new();
            for a in lower.atoms() {
                let k = exact_kernel(&bar, a.position).unwrap();
                for b in k.atoms() {
                    mix.push((b.position, a.weight * b.weight));
                }
                // martingale exactness per start atom
                let mean: f64 = k.atoms().iter().map(|b| b.position * b.weight).sum();
                assert!((mean - a.position).abs() < 1e-12);
            }
            let mixed = MarginalDistribution::from_weighted(&mix).unwrap();
            assert_dist_eq(
                &mixed,
                &upper
                    .atoms()
                    .iter()
                    .map(|a| (a.position, a.weight))
                    .collect::<Vec<_>>(),
                1e-9,
            );
        }
    }

    fn pair_b_spread() -> MarginalDistribution {
        // mean-preserving spread of the two-point law: the -1 atom splits
        // to {-2, 0}, the +1 atom to {0, 1.5}
        MarginalDistribution::from_weighted(&[
            (-2.0, 0.25),
            (0.0, 0.25 + 1.0 / 6.0),
            (1.5, 1.0 / 3.0),
        ])
        .unwrap()
    }

    #[test]
    fn sampler_matches_kernel_pair_a() {
        let bar = build_barrier(&dirac0(), &pair_a(), 0.0, 1.0).unwrap();
        let n = 100_000;
        let mut wins = 0usize;
        for i in 0..n {
            let mut rng = CounterRng::new(11, i as u64, 1);
            let s = sample_transition(&bar, 0.0, &mut rng).unwrap();
            assert!(s.landing == -1.0 || s.landing == 1.0);
            if s.landing == 1.0 {
                wins += 1;
            }
        }
        let frac = wins as f64 / n as f64;
        assert!((frac - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt(), "{frac}");
    }

    #[test]
    fn sampler_matches_kernel_pair_b() {
        let bar = build_barrier(&dirac0(), &pair_b(), 0.0, 1.0).unwrap();
        let n = 100_000;
        let mut counts = [0usize; 3];
        for i in 0..n {
            let mut rng = CounterRng::new(17, i as u64, 1);
            let s = sample_transition(&bar, 0.0, &mut rng).unwrap();
            let j = if s.landing == -1.0 {
                0
            } else if s.landing == 0.0 {
                1
            } else {
                2
            };
            counts[j] += 1;
        }
        let stderr = (2.0 / 9.0 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 4.0 * stderr);
        }
    }

    #[test]
    fn jump_time_examples() {
        let bar_a = build_barrier(&dirac0(), &pair_a(), 0.0, 1.0).unwrap();
        assert!((bar_a.jump_time_of(1.0 / 3.0) - 0.25).abs() < 1e-12);
        assert_eq!(bar_a.jump_time_of(1.0), 1.0);
        let bar_b = build_barrier(&dirac0(), &pair_b(), 0.0, 1.0).unwrap();
        assert!((bar_b.jump_time_of(0.5) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn path_value_examples() {
        let bar = build_barrier(&dirac0(), &pair_a(), 0.0, 1.0).unwrap();
        // winner rides the ceiling alpha(u) = u / (1 - u)
        let winner = PathSample {
            start: 0.0,
            terminal_max: 1.0,
            landing: 1.0,
            jump_u: 1.0,
            jump_time: 1.0,
        };
        assert!((path_value(&winner, &bar, 0.25).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        // loser with terminal max 1/3 jumps at F*(1/3) = 1/4
        let loser = PathSample {
            start: 0.0,
            terminal_max: 1.0 / 3.0,
            landing: -1.0,
            jump_u: 0.25,
            jump_time: 0.25,
        };
        assert!((path_value(&loser, &bar, 0.2).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(path_value(&loser, &bar, 0.3).unwrap(), -1.0);
        assert_eq!(path_value(&loser, &bar, 0.25).unwrap(), -1.0);
        assert!((path_left_limit(&loser, &bar, 0.25).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        // start above the ceiling
        let high = PathSample {
            start: 0.5,
            terminal_max: 0.9,
            landing: -1.0,
            jump_u: bar.functions().fstar(0.9),
            jump_time: bar.jump_time_of(0.9),
        };
        assert_eq!(path_value(&high, &bar, 0.1).unwrap(), 0.5);
        assert!(path_value(&high, &bar, 1.5).is_err());
    }

    #[test]
    fn path_monotone_before_jump() {
        let surface = CallSurface::new(vec![0.0, 1.0], vec![dirac0(), pair_b()]).unwrap();
        let sampler = SurfaceSampler::new(&surface).unwrap();
        for i in 0..200 {
            let p = sampler.sample_path(3, i).unwrap();
            let tr = &p.transitions[0];
            let bar = &sampler.barriers()[0];
            let mut prev = f64::NEG_INFINITY;
            let mut jumped = false;
            for j in 0..=100 {
                let t = j as f64 / 100.0;
                let v = path_value(tr, bar, t).unwrap();
                if t < tr.jump_time {
                    assert!(v >= prev - 1e-12);
                } else if !jumped {
                    assert!(v <= path_left_limit(tr, bar, tr.jump_time).unwrap() + 1e-12);
                    jumped = true;
                } else {
                    assert_eq!(v, tr.landing);
                }
                prev = v;
            }
        }
    }

    #[test]
    fn simulate_deterministic() {
        let surface = CallSurface::new(vec![0.0, 1.0], vec![dirac0(), pair_a()]).unwrap();
        let a = simulate_paths(&surface, 500, 42, &[0.25, 0.5, 1.0]).unwrap();
        let b = simulate_paths(&surface, 500, 42, &[0.25, 0.5, 1.0]).unwrap();
        assert_eq!(a, b);
        // query-time ordering does not change per-time values
        let c = simulate_paths(&surface, 500, 42, &[1.0, 0.5, 0.25]).unwrap();
        for (ra, rc) in a.iter().zip(&c) {
            assert_eq!(ra[0], rc[2]);
            assert_eq!(ra[2], rc[0]);
        }
    }

    #[test]
    fn simulate_interior_mean_is_martingale() {
        let surface = CallSurface::new(vec![0.0, 1.0], vec![dirac0(), pair_a()]).unwrap();
        let m = simulate_paths(&surface, 100_000, 5, &[0.25]).unwrap();
        let mean: f64 = m.iter().map(|r| r[0]).sum::<f64>() / m.len() as f64;
        // exact interior second moment: mass t at -1, 1 - t at t/(1-t)
        let t: f64 = 0.25;
        let var = t * 1.0 + (1.0 - t) * (t / (1.0 - t)).powi(2);
        assert!(mean.abs() < 4.0 * (var / m.len() as f64).sqrt(), "{mean}");
    }

    #[test]
    fn simulate_rejects_bad_queries() {
        let surface = CallSurface::new(vec![0.0, 1.0], vec![dirac0(), pair_a()]).unwrap();
        assert!(simulate_paths(&surface, 10, 1, &[]).is_err());
        assert!(simulate_paths(&surface, 10, 1, &[2.0]).is_err());
    }

    #[test]
    fn chained_landing_is_atom_of_final_marginal() {
        let third = MarginalDistribution::from_weighted(&[
            (-2.0, 1.0 / 3.0),
            (0.0, 1.0 / 3.0),
            (2.0, 1.0 / 3.0),
        ])
        .unwrap();
        let surface =
            CallSurface::new(vec![0.0, 1.0, 2.0], vec![dirac0(), pair_a(), third.clone()]).unwrap();
        let m = simulate_paths(&surface, 2000, 9, &[2.0]).unwrap();
        for row in &m {
            assert!(third.atoms().iter().any(|a| a.position == row[0]));
        }
    }

    #[test]
    fn each_transition_consumes_bounded_draws() {
        let bar = build_barrier(&dirac0(), &pair_b(), 0.0, 1.0).unwrap();
        let max_draws = bar.rungs().len() + 1;
        let _ = max_draws;
        for i in 0..1000 {
            let mut rng = CounterRng::new(23, i, 1);
            sample_transition(&bar, 0.0, &mut rng).unwrap();
        }
    }
}
