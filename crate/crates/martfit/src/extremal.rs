//! Extremal interpolation between consecutive marginals.
//!
//! Given two marginals in convex order with calls `C0 <= C1`, the
//! interpolated call at interior fraction `u` is built from the
//! `u`-quantile `beta(u)` of the upper marginal, the supporting line
//! `g_u` of the upper call at `beta(u)` with slope `u - 1`, and the last
//! crossing `alpha(u)` of that line with the lower call:
//!
//! ```text
//! C~(t, x) = C1(x)                 for x <= beta(u)
//!          = max(g_u(x), C0(x))    for x >  beta(u)
//! ```
//!
//! The right-continuous generalized inverse `F*` of `alpha` drives the
//! embedding barrier downstream. All piecewise algebra here is exact:
//! `alpha` is solved segment-by-segment on the piecewise-linear lower
//! call and `F*` inverts each piece in closed form.

use crate::error::{MartfitError, Result};
use crate::marginal::{CallSlice, CallSurface, MarginalDistribution, CALL_TOL, PROB_TOL};

/// `u`-quantile of the upper marginal, `inf { x : F1(x) >= u }`.
pub fn quantile_beta(upper: &MarginalDistribution, u: f64) -> Result<f64> {
    upper.quantile(u)
}

fn beta_of_slice(upper: &CallSlice, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(MartfitError::Domain(format!(
            "quantile level {u} outside (0, 1]"
        )));
    }
    let mut acc = 0.0;
    for k in upper.kinks() {
        acc += k.weight;
        if acc >= u - CALL_TOL {
            return Ok(k.position);
        }
    }
    Ok(upper.kinks().last().unwrap().position)
}

/// Supporting line of the upper call at `beta(u)` with slope `u - 1`,
/// evaluated at `x`.
pub fn tangent_g(upper_call: &CallSlice, u: f64, x: f64) -> Result<f64> {
    let beta = beta_of_slice(upper_call, u)?;
    Ok(upper_call.eval(beta) + (x - beta) * (u - 1.0))
}

/// Last crossing of the tangent with the lower call:
/// `sup { x >= beta(u) : g_u(x) >= C0(x) }`.
///
/// The difference `g_u - C0` is concave and piecewise linear, so the
/// crossing is found by scanning the lower call's kinks and solving one
/// linear equation on the bracketing segment. For `u = 1` the tangent is
/// the zero function and the crossing is clamped to the top of the upper
/// support.
pub fn compute_alpha(lower_call: &CallSlice, upper_call: &CallSlice, u: f64) -> Result<f64> {
    let beta = beta_of_slice(upper_call, u)?;
    let y = upper_call.eval(beta);
    let x_top = upper_call.kinks().last().unwrap().position;
    let h = |x: f64| y + (x - beta) * (u - 1.0) - lower_call.eval(x);

    let h_beta = h(beta);
    if h_beta < -PROB_TOL {
        return Err(MartfitError::ConvexOrder(format!(
            "lower call exceeds upper call at beta({u}) = {beta}"
        )));
    }
    if u == 1.0 {
        return Ok(x_top);
    }

    // candidate grid: beta, the lower kinks strictly above it, the top of
    // the upper support
    let mut pts: Vec<f64> = vec![beta];
    for k in lower_call.kinks() {
        if k.position > beta && k.position < x_top {
            pts.push(k.position);
        }
    }
    pts.push(x_top);

    let mut last_ok = 0usize;
    for (i, &p) in pts.iter().enumerate() {
        if h(p) >= -CALL_TOL {
            last_ok = i;
        } else {
            break;
        }
    }
    let a = pts[last_ok];
    if last_ok + 1 == pts.len() {
        // non-negative all the way to the top of the upper support
        return Ok(x_top);
    }
    let b = pts[last_ok + 1];
    let ha = h(a).max(0.0);
    let slope = (u - 1.0) - lower_call.slope_right(a);
    if slope >= 0.0 {
        // concavity: h cannot drop below zero on [a, b] with a
        // non-negative slope unless it is already negative at a
        return Ok(b);
    }
    Ok((a - ha / slope).clamp(a, b))
}

/// Interpolated call between two slices at time `t` in `[t0, t1]`.
pub fn extremal_pair_call(
    lower: &CallSlice,
    upper: &CallSlice,
    t0: f64,
    t1: f64,
    t: f64,
    x: f64,
) -> Result<f64> {
    if !(t0 < t1) {
        return Err(MartfitError::Domain(format!(
            "degenerate interval [{t0}, {t1}]"
        )));
    }
    if t < t0 || t > t1 {
        return Err(MartfitError::Domain(format!(
            "time {t} outside [{t0}, {t1}]"
        )));
    }
    if t == t0 {
        return Ok(lower.eval(x));
    }
    if t == t1 {
        return Ok(upper.eval(x));
    }
    let u = (t - t0) / (t1 - t0);
    let beta = beta_of_slice(upper, u)?;
    if x <= beta {
        Ok(upper.eval(x))
    } else {
        let g = upper.eval(beta) + (x - beta) * (u - 1.0);
        Ok(g.max(lower.eval(x)))
    }
}

/// The per-interval interpolation data: `beta`, `alpha`, `F*` and the
/// cumulative-weight breakpoints of the upper marginal.
#[derive(Debug, Clone)]
pub struct BarrierFunctions {
    t0: f64,
    t1: f64,
    lower_call: CallSlice,
    upper_call: CallSlice,
    upper: MarginalDistribution,
    /// `0 = u_0 < u_1 < ... < u_m = 1`.
    breakpoints: Vec<f64>,
}

impl BarrierFunctions {
    pub fn new(
        lower: &MarginalDistribution,
        upper: &MarginalDistribution,
        t0: f64,
        t1: f64,
    ) -> Result<Self> {
        if !(t0 < t1) {
            return Err(MartfitError::Domain(format!(
                "degenerate interval [{t0}, {t1}]"
            )));
        }
        if !crate::marginal::check_convex_order(lower, upper) {
            return Err(MartfitError::ConvexOrder(format!(
                "marginals at t = {t0} and t = {t1} are not in convex order"
            )));
        }
        let mut breakpoints = vec![0.0];
        breakpoints.extend(upper.cumulative_weights());
        let bf = Self {
            t0,
            t1,
            lower_call: lower.to_slice(),
            upper_call: upper.to_slice(),
            upper: upper.clone(),
            breakpoints,
        };
        bf.check_alpha_shape()?;
        Ok(bf)
    }

    /// Monotonicity of `alpha`, asserted on a 1e3-point `u`-grid. Upward
    /// jumps are admissible (they occur across affine stretches of the
    /// lower call and carry no probability mass); decreases are not.
    fn check_alpha_shape(&self) -> Result<()> {
        let n = 1000usize;
        let mut prev: Option<(f64, f64)> = None;
        for i in 1..=n {
            let u = i as f64 / n as f64;
            let a = self.alpha(u)?;
            if let Some((pu, pa)) = prev {
                if a < pa - PROB_TOL {
                    return Err(MartfitError::Internal(format!(
                        "alpha decreasing: alpha({pu}) = {pa} > alpha({u}) = {a}"
                    )));
                }
            }
            prev = Some((u, a));
        }
        Ok(())
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn lower_call(&self) -> &CallSlice {
        &self.lower_call
    }

    pub fn upper_call(&self) -> &CallSlice {
        &self.upper_call
    }

    pub fn upper(&self) -> &MarginalDistribution {
        &self.upper
    }

    /// Cumulative-weight levels of the upper marginal, including 0 and 1.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn beta(&self, u: f64) -> Result<f64> {
        self.upper.quantile(u)
    }

    pub fn alpha(&self, u: f64) -> Result<f64> {
        compute_alpha(&self.lower_call, &self.upper_call, u)
    }

    /// Interior time fraction `u(t) = (t - t0) / (t1 - t0)`.
    pub fn fraction(&self, t: f64) -> f64 {
        ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0)
    }

    /// Ceiling along which unjumped paths ride: `alpha(u(t))`, extended to
    /// the bottom of the upper support at `u = 0`.
    pub fn ceiling(&self, u: f64) -> Result<f64> {
        if u <= 0.0 {
            Ok(self.upper.min_position())
        } else {
            self.alpha(u.min(1.0))
        }
    }

    /// Right-continuous generalized inverse of `alpha`:
    /// `F*(s) = inf { u in (0, 1) : alpha(u) > s }`, with the empty set
    /// mapping to 1.
    ///
    /// Solved piece-by-piece: on each cumulative-weight piece `beta` and
    /// the tangent anchor are fixed, so the threshold in `u` at which the
    /// tangent clears the lower call at `s` is affine and inverts exactly.
    pub fn fstar(&self, s: f64) -> f64 {
        let u = self.fstar_pieces(s);
        // the first-piece solve cancels to roundoff for s below the start
        // of the ladder; snap to the exact endpoint so F* stays monotone
        if u <= PROB_TOL {
            0.0
        } else {
            u
        }
    }

    fn fstar_pieces(&self, s: f64) -> f64 {
        let atoms = self.upper.atoms();
        for k in 0..atoms.len() {
            let u_lo = self.breakpoints[k];
            let u_hi = self.breakpoints[k + 1];
            let beta = atoms[k].position;
            let anchor = self.upper_call.eval(beta);
            if beta > s {
                // every u in the piece has alpha(u) >= beta > s
                return u_lo;
            }
            if s == beta {
                let diff = anchor - self.lower_call.eval(s);
                if diff > CALL_TOL {
                    return u_lo;
                }
                // tangency at beta: the crossing moves past s once the
                // tangent slope exceeds the lower call's right slope
                let u_star = 1.0 + self.lower_call.slope_right(s);
                if u_star < u_hi - PROB_TOL {
                    return u_star.max(u_lo);
                }
                continue;
            }
            // s > beta: g_u(s) - C0(s) is affine increasing in u
            let u_star = 1.0 - (anchor - self.lower_call.eval(s)) / (s - beta);
            if u_star < u_hi - PROB_TOL {
                return u_star.clamp(u_lo, u_hi);
            }
            if u_star <= u_hi + PROB_TOL {
                // boundary tie (up to rounding): the tangent only touches
                // the lower call at s when u = u_hi; the crossing strictly
                // passes s there iff the tangent leaves s above the call
                if (u_hi - 1.0) - self.lower_call.slope_right(s) > 0.0 {
                    return u_hi;
                }
            }
        }
        1.0
    }

    /// Interpolated call `C~(t, x)` on this interval.
    pub fn call(&self, t: f64, x: f64) -> Result<f64> {
        extremal_pair_call(&self.lower_call, &self.upper_call, self.t0, self.t1, t, x)
    }
}

/// A chained extremal interpolation over a full surface grid, constant
/// before the first time and after the last.
#[derive(Debug, Clone)]
pub struct ExtremalSurface {
    surface: CallSurface,
    slices: Vec<CallSlice>,
}

/// Build the chained interpolator. The surface must pass CP validation.
pub fn extremal_chain(surface: &CallSurface) -> Result<ExtremalSurface> {
    surface.require_valid()?;
    let slices = surface.marginals().iter().map(|m| m.to_slice()).collect();
    Ok(ExtremalSurface {
        surface: surface.clone(),
        slices,
    })
}

impl ExtremalSurface {
    pub fn surface(&self) -> &CallSurface {
        &self.surface
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let times = self.surface.times();
        if t <= times[0] {
            return Ok(self.slices[0].eval(x));
        }
        if t >= *times.last().unwrap() {
            return Ok(self.slices.last().unwrap().eval(x));
        }
        let k = match times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => return Ok(self.slices[i].eval(x)),
            Err(i) => i - 1,
        };
        extremal_pair_call(
            &self.slices[k],
            &self.slices[k + 1],
            times[k],
            times[k + 1],
            t,
            x,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginal::check_convex_order;

    fn dirac0() -> MarginalDistribution {
        MarginalDistribution::dirac(0.0)
    }

    fn pair_a_upper() -> MarginalDistribution {
        MarginalDistribution::from_weighted(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn pair_b_upper() -> MarginalDistribution {
        MarginalDistribution::from_weighted(&[(-1.0, 1.0 / 3.0), (0.0, 1.0 / 3.0), (1.0, 1.0 / 3.0)])
            .unwrap()
    }

    #[test]
    fn quantile_beta_examples() {
        assert_eq!(quantile_beta(&pair_b_upper(), 0.5).unwrap(), 0.0);
        assert_eq!(quantile_beta(&pair_b_upper(), 1.0).unwrap(), 1.0);
        assert_eq!(quantile_beta(&pair_a_upper(), 0.2).unwrap(), -1.0);
        assert!(quantile_beta(&pair_a_upper(), 0.0).is_err());
    }

    #[test]
    fn tangent_examples() {
        let up_a = pair_a_upper().to_slice();
        assert!((tangent_g(&up_a, 0.25, 0.0).unwrap() - 0.25).abs() < 1e-15);
        // anchor point
        let beta = quantile_beta(&pair_a_upper(), 0.25).unwrap();
        assert!((tangent_g(&up_a, 0.25, beta).unwrap() - up_a.eval(beta)).abs() < 1e-15);
        let up_b = pair_b_upper().to_slice();
        assert!((tangent_g(&up_b, 0.5, 1.0 / 3.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_examples() {
        let lo = dirac0().to_slice();
        let up_a = pair_a_upper().to_slice();
        let a = compute_alpha(&lo, &up_a, 0.25).unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-14);

        // identical marginals: off the cumulative-weight levels the tangent
        // never exceeds its own call, so the crossing stays at beta
        let same = pair_a_upper().to_slice();
        for u in [0.1, 0.2, 0.7, 0.99] {
            let alpha = compute_alpha(&same, &same, u).unwrap();
            let beta = beta_of_slice(&same, u).unwrap();
            assert!((alpha - beta).abs() < 1e-12, "u = {u}: {alpha} vs {beta}");
        }
        // at u = 1/2 the tangent coincides with the call on [-1, 1], so the
        // last crossing is the top of the support
        assert_eq!(compute_alpha(&same, &same, 0.5).unwrap(), 1.0);

        let up_b = pair_b_upper().to_slice();
        let a = compute_alpha(&lo, &up_b, 0.5).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn alpha_closed_forms_pair_a() {
        let lo = dirac0().to_slice();
        let up = pair_a_upper().to_slice();
        for u in [0.05, 0.1, 0.25, 0.4, 0.5] {
            let a = compute_alpha(&lo, &up, u).unwrap();
            assert!((a - u / (1.0 - u)).abs() < 1e-12, "u = {u}");
        }
        for u in [0.51, 0.7, 0.9] {
            let a = compute_alpha(&lo, &up, u).unwrap();
            assert!((a - 1.0).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn fstar_examples() {
        let bf = BarrierFunctions::new(&dirac0(), &pair_b_upper(), 0.0, 1.0).unwrap();
        assert!((bf.fstar(0.5) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(bf.fstar(-10.0), 0.0);
        assert_eq!(bf.fstar(10.0), 1.0);
        assert_eq!(bf.fstar(1.0), 1.0);

        let bf_a = BarrierFunctions::new(&dirac0(), &pair_a_upper(), 0.0, 1.0).unwrap();
        for s in [0.0, 0.1, 0.3, 1.0 / 3.0, 0.6, 0.9] {
            assert!(
                (bf_a.fstar(s) - s / (1.0 + s)).abs() < 1e-12,
                "s = {s}: {}",
                bf_a.fstar(s)
            );
        }
        assert_eq!(bf_a.fstar(1.0), 1.0);
    }

    #[test]
    fn fstar_is_generalized_inverse() {
        let bf = BarrierFunctions::new(&dirac0(), &pair_b_upper(), 0.0, 1.0).unwrap();
        for i in 0..200 {
            let s = -1.2 + i as f64 * 0.012;
            let u = bf.fstar(s);
            assert!((0.0..=1.0).contains(&u));
            if u > 0.0 {
                // alpha(F*(s)-) <= s
                let eps = 1e-9;
                let a = bf.alpha((u - eps).max(1e-12)).unwrap();
                assert!(a <= s + 1e-6, "s = {s}, u = {u}, alpha = {a}");
            }
        }
    }

    #[test]
    fn pair_call_examples() {
        let lo = dirac0().to_slice();
        let up = pair_a_upper().to_slice();
        let v = extremal_pair_call(&lo, &up, 0.0, 1.0, 0.25, 0.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        let v = extremal_pair_call(&lo, &up, 0.0, 1.0, 0.75, 0.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let up_b = pair_b_upper().to_slice();
        let v = extremal_pair_call(&lo, &up_b, 0.0, 1.0, 0.5, 1.0 / 3.0).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);

        assert!(extremal_pair_call(&lo, &up, 0.0, 1.0, 1.5, 0.0).is_err());
        assert!(extremal_pair_call(&lo, &up, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn pair_call_endpoints_exact() {
        let lo = pair_a_upper().to_slice();
        let up = pair_b_upper();
        // spread the two-point law out to a three-point law of equal mean
        assert!(check_convex_order(&pair_a_upper(), &wider()));
        let upw = wider().to_slice();
        for x in [-3.0, -1.0, -0.3, 0.0, 0.4, 1.0, 2.5] {
            assert_eq!(
                extremal_pair_call(&lo, &upw, 0.0, 2.0, 0.0, x).unwrap(),
                lo.eval(x)
            );
            assert_eq!(
                extremal_pair_call(&lo, &upw, 0.0, 2.0, 2.0, x).unwrap(),
                upw.eval(x)
            );
        }
        let _ = up;
    }

    fn wider() -> MarginalDistribution {
        MarginalDistribution::from_weighted(&[(-2.0, 0.25), (-1.0, 0.25), (1.0, 0.25), (2.0, 0.25)])
            .unwrap()
    }

    #[test]
    fn chain_matches_grid_and_is_monotone() {
        let surface = CallSurface::new(
            vec![0.0, 1.0, 2.0],
            vec![
                dirac0(),
                pair_a_upper(),
                MarginalDistribution::from_weighted(&[(-2.0, 1.0 / 3.0), (0.0, 1.0 / 3.0), (2.0, 1.0 / 3.0)])
                    .unwrap(),
            ],
        )
        .unwrap();
        let chain = extremal_chain(&surface).unwrap();
        for (k, t) in surface.times().iter().enumerate() {
            for x in [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0] {
                assert_eq!(chain.eval(*t, x).unwrap(), surface.marginal(k).call(x));
            }
        }
        // monotone in t on a grid
        for xi in 0..40 {
            let x = -2.5 + xi as f64 * 0.125;
            let mut prev = f64::NEG_INFINITY;
            for ti in 0..=100 {
                let t = ti as f64 * 0.02;
                let v = chain.eval(t, x).unwrap();
                assert!(v >= prev - CALL_TOL, "x = {x}, t = {t}");
                prev = v;
            }
        }
    }

    #[test]
    fn chain_of_repeated_marginal_is_constant() {
        let surface = CallSurface::new(vec![0.0, 1.0], vec![pair_b_upper(), pair_b_upper()]).unwrap();
        let chain = extremal_chain(&surface).unwrap();
        for t in [0.0, 0.25, 0.5, 0.8, 1.0] {
            for x in [-1.5, -1.0, -0.2, 0.0, 0.7, 1.0] {
                assert!(
                    (chain.eval(t, x).unwrap() - pair_b_upper().call(x)).abs() < 1e-12,
                    "t = {t}, x = {x}"
                );
            }
        }
    }

    #[test]
    fn tangent_slope_identity() {
        // on (beta, alpha) the interpolated call has x-slope u - 1
        let lo = dirac0().to_slice();
        let up = pair_a_upper().to_slice();
        for ti in 1..10 {
            let t = ti as f64 * 0.05; // u < 1/2 so alpha = u/(1-u) > 0
            let u = t;
            let beta = -1.0;
            let alpha = u / (1.0 - u);
            let x1 = beta + 0.25 * (alpha - beta);
            let x2 = beta + 0.75 * (alpha - beta);
            let c1 = extremal_pair_call(&lo, &up, 0.0, 1.0, t, x1).unwrap();
            let c2 = extremal_pair_call(&lo, &up, 0.0, 1.0, t, x2).unwrap();
            let slope = (c2 - c1) / (x2 - x1);
            assert!((slope - (u - 1.0)).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn time_continuity_refines() {
        let surface = CallSurface::new(vec![0.0, 1.0], vec![dirac0(), pair_a_upper()]).unwrap();
        let chain = extremal_chain(&surface).unwrap();
        let xs: Vec<f64> = (0..50).map(|i| -1.2 + i as f64 * 0.05).collect();
        let mut maxima = Vec::new();
        for delta in [1e-2, 1e-3, 1e-4] {
            let mut worst: f64 = 0.0;
            let steps = (1.0 / delta) as usize;
            for i in 0..steps {
                let t = i as f64 * delta;
                for &x in &xs {
                    let d = (chain.eval(t + delta, x).unwrap() - chain.eval(t, x).unwrap()).abs();
                    worst = worst.max(d);
                }
            }
            maxima.push(worst);
        }
        assert!(maxima[0] > maxima[1] && maxima[1] > maxima[2], "{maxima:?}");
    }
}
