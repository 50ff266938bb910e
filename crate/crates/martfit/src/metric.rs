//! The capped uniform metric between call surfaces:
//!
//! ```text
//! d(A, B) = sup over (t, x) of min(|A(t,x) - B(t,x)|, 2^(-|x|-t))
//! ```
//!
//! The cap makes the supremum effectively compact: everything with
//! `|x| + t > 40` contributes less than `2^-40` and is ignored. The sup
//! is located by branch-and-bound over rectangles, using monotonicity of
//! each surface in `t` and the slope bound `|dC/dx| <= 1` to bound the
//! difference from rectangle-corner evaluations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::extremal::ExtremalSurface;

const DOMAIN_RADIUS: f64 = 40.0;

#[derive(Debug, Clone, Copy)]
struct Rect {
    t_lo: f64,
    t_hi: f64,
    x_lo: f64,
    x_hi: f64,
    upper: f64,
}

impl PartialEq for Rect {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper
    }
}
impl Eq for Rect {}
impl PartialOrd for Rect {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Rect {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

fn cap(t: f64, x: f64) -> f64 {
    (-(x.abs() + t)).exp2()
}

struct Search<'a> {
    a: &'a ExtremalSurface,
    b: &'a ExtremalSurface,
}

impl Search<'_> {
    fn objective(&self, t: f64, x: f64) -> f64 {
        let d = (self.a.eval(t, x).unwrap() - self.b.eval(t, x).unwrap()).abs();
        d.min(cap(t, x))
    }

    /// Upper bound of the objective over a rectangle.
    fn bound(&self, t_lo: f64, t_hi: f64, x_lo: f64, x_hi: f64) -> f64 {
        let min_abs_x = if x_lo <= 0.0 && x_hi >= 0.0 {
            0.0
        } else {
            x_lo.abs().min(x_hi.abs())
        };
        let cap_max = (-(min_abs_x + t_lo)).exp2();
        // each surface is non-decreasing in t, so on the rectangle
        // |A - B| <= max(A(t_hi,.) - B(t_lo,.), B(t_hi,.) - A(t_lo,.)),
        // and that envelope is 2-Lipschitz in x
        let u = |x: f64| -> f64 {
            let a_hi = self.a.eval(t_hi, x).unwrap();
            let a_lo = self.a.eval(t_lo, x).unwrap();
            let b_hi = self.b.eval(t_hi, x).unwrap();
            let b_lo = self.b.eval(t_lo, x).unwrap();
            (a_hi - b_lo).max(b_hi - a_lo)
        };
        let d_max = u(x_lo).max(u(x_hi)) + (x_hi - x_lo);
        cap_max.min(d_max.max(0.0))
    }
}

/// Supremum of the capped difference within additive error `tol`.
pub fn metric_d(a: &ExtremalSurface, b: &ExtremalSurface, tol: f64) -> f64 {
    assert!(tol > 0.0, "metric tolerance must be positive");
    let search = Search { a, b };
    let mut heap = BinaryHeap::new();
    let root = Rect {
        t_lo: 0.0,
        t_hi: DOMAIN_RADIUS,
        x_lo: -DOMAIN_RADIUS,
        x_hi: DOMAIN_RADIUS,
        upper: search.bound(0.0, DOMAIN_RADIUS, -DOMAIN_RADIUS, DOMAIN_RADIUS),
    };
    let mut best = search.objective(0.0, 0.0).max((-DOMAIN_RADIUS).exp2());
    heap.push(root);

    let mut iterations = 0usize;
    while let Some(rect) = heap.pop() {
        if rect.upper <= best + tol {
            break;
        }
        iterations += 1;
        if iterations > 4_000_000 {
            break;
        }
        let tc = 0.5 * (rect.t_lo + rect.t_hi);
        let xc = 0.5 * (rect.x_lo + rect.x_hi);
        best = best.max(search.objective(tc, xc));
        // split the longer side (t and x share the same scale)
        let children: [(f64, f64, f64, f64); 2] = if rect.t_hi - rect.t_lo >= rect.x_hi - rect.x_lo
        {
            [
                (rect.t_lo, tc, rect.x_lo, rect.x_hi),
                (tc, rect.t_hi, rect.x_lo, rect.x_hi),
            ]
        } else {
            [
                (rect.t_lo, rect.t_hi, rect.x_lo, xc),
                (rect.t_lo, rect.t_hi, xc, rect.x_hi),
            ]
        };
        for (t_lo, t_hi, x_lo, x_hi) in children {
            let upper = search.bound(t_lo, t_hi, x_lo, x_hi);
            if upper > best + tol {
                heap.push(Rect {
                    t_lo,
                    t_hi,
                    x_lo,
                    x_hi,
                    upper,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::extremal_chain;
    use crate::marginal::{CallSurface, MarginalDistribution};

    fn pair_a_surface() -> ExtremalSurface {
        let surface = CallSurface::new(
            vec![0.0, 1.0],
            vec![
                MarginalDistribution::dirac(0.0),
                MarginalDistribution::from_weighted(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap(),
            ],
        )
        .unwrap();
        extremal_chain(&surface).unwrap()
    }

    fn constant_dirac_surface() -> ExtremalSurface {
        let surface =
            CallSurface::new(vec![0.0], vec![MarginalDistribution::dirac(0.0)]).unwrap();
        extremal_chain(&surface).unwrap()
    }

    #[test]
    fn identity_is_zero() {
        let a = pair_a_surface();
        assert!(metric_d(&a, &a, 1e-6) <= 1e-6);
    }

    #[test]
    fn symmetric() {
        let a = pair_a_surface();
        let b = constant_dirac_surface();
        let d1 = metric_d(&a, &b, 1e-5);
        let d2 = metric_d(&b, &a, 1e-5);
        assert!((d1 - d2).abs() <= 2e-5);
    }

    #[test]
    fn pair_a_vs_dirac_is_half() {
        // difference peaks at x = 0 where C~(t, 0) reaches 1/2 at t = 1/2
        // while the cap 2^-t still exceeds 1/2 up to t = 1
        let d = metric_d(&pair_a_surface(), &constant_dirac_surface(), 1e-5);
        assert!((d - 0.5).abs() < 1e-4, "{d}");
    }

    #[test]
    fn bounded_by_one() {
        let wide = CallSurface::new(
            vec![0.0, 2.0],
            vec![
                MarginalDistribution::dirac(0.0),
                MarginalDistribution::from_weighted(&[(-8.0, 0.5), (8.0, 0.5)]).unwrap(),
            ],
        )
        .unwrap();
        let d = metric_d(
            &extremal_chain(&wide).unwrap(),
            &constant_dirac_surface(),
            1e-4,
        );
        assert!(d <= 1.0 + 1e-4);
    }
}
