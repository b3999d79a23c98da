//! Bracketed univariate maximization.
//!
//! Brent's method: golden-section steps with successive parabolic
//! interpolation where the parabola is trustworthy.

use crate::error::{Error, Result};
use crate::num::Real;

const MAX_ITERS: usize = 300;
const NONFINITE_RETRIES: usize = 8;

/// Maximize `f` on the bracket `(lo, hi)`.
///
/// Returns `(argmax, value)` with the argmax located to within `tol` of a
/// local maximizer. A constant (plateau) objective converges to an interior
/// point without error. If the objective is non-finite at the probe points,
/// the bracket is shrunk toward its midpoint and the search restarted; after
/// repeated failures an [`Error::Optimization`] is returned.
pub fn brent_maximize<T, F>(mut f: F, lo: T, hi: T, tol: T) -> Result<(T, T)>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !(lo < hi) {
        return Err(Error::Optimization(format!(
            "invalid bracket: lo={lo} must be below hi={hi}"
        )));
    }
    let mut a = lo;
    let mut b = hi;
    for _ in 0..NONFINITE_RETRIES {
        match brent_minimize_inner(|x| -f(x), a, b, tol) {
            Some((x, neg_v)) => return Ok((x, -neg_v)),
            None => {
                let quarter = (b - a) * T::of(0.25);
                a = a + quarter;
                b = b - quarter;
            }
        }
    }
    Err(Error::Optimization(format!(
        "objective non-finite on bracket ({lo}, {hi}) after repeated shrinks"
    )))
}

/// Classic Brent minimization. Returns `None` if the best value found is
/// non-finite (signals the caller to shrink the bracket).
fn brent_minimize_inner<T, F>(mut f: F, lo: T, hi: T, tol: T) -> Option<(T, T)>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let golden = T::of(0.381_966_011_250_105_2);
    let eps = T::epsilon().sqrt();
    let zero = T::zero();
    let half = T::of(0.5);
    let two = T::of(2.0);

    let mut a = lo;
    let mut b = hi;
    let mut x = a + golden * (b - a);
    let sanitize = |v: T| if v.is_finite() { v } else { T::infinity() };
    let mut fx = sanitize(f(x));
    let (mut w, mut v) = (x, x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d = zero;
    let mut e = zero;

    for _ in 0..MAX_ITERS {
        let m = half * (a + b);
        let tol1 = tol * x.abs() + eps;
        let tol2 = two * tol1;
        if (x - m).abs() <= tol2 - half * (b - a) {
            break;
        }

        let mut took_parabolic = false;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            // Fit a parabola through (x, fx), (w, fw), (v, fv).
            let r = (x - w) * (fx - fv);
            let q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            let mut q2 = two * (q - r);
            if q2 > zero {
                p = -p;
            } else {
                q2 = -q2;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (half * q2 * e_prev).abs()
                && p > q2 * (a - x)
                && p < q2 * (b - x)
                && q2 != zero
            {
                d = p / q2;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                took_parabolic = true;
            }
        }
        if !took_parabolic {
            e = if x < m { b - x } else { a - x };
            d = golden * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d >= zero {
            x + tol1
        } else {
            x - tol1
        };
        let fu = sanitize(f(u));

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u >= x {
                b = u;
            } else {
                a = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    if fx.is_finite() {
        Some((x, fx))
    } else {
        None
    }
}
