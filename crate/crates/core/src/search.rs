//! Small 1-D numeric search utilities shared by the resonance extractor,
//! the homodyne-angle optimizer and the sweep argmax refinement.

use crate::scalar::{real, Real};

/// Golden-section maximization of `f` on `[a, b]`.
///
/// Assumes a single interior maximum; returns `(x, f(x))` once the bracket
/// width drops below `xtol`.
pub fn golden_section_max<R: Real, F: Fn(R) -> R>(f: F, a: R, b: R, xtol: R) -> (R, R) {
    // inverse golden ratio
    let inv_phi = real::<R>(0.618_033_988_749_894_9);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let half = real::<R>(0.5);
    for _ in 0..512 {
        if hi - lo <= xtol {
            break;
        }
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = half * (lo + hi);
    (x, f(x))
}

/// Bisection for `f(x) = level` on `[a, b]`, assuming `f(a) - level` and
/// `f(b) - level` have opposite signs. Returns the midpoint of the final
/// bracket of width `xtol`.
pub fn bisect_to_level<R: Real, F: Fn(R) -> R>(f: F, a: R, b: R, level: R, xtol: R) -> R {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo) - level;
    let half = real::<R>(0.5);
    for _ in 0..512 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mid = half * (lo + hi);
        let fmid = f(mid) - level;
        if (flo > R::zero()) == (fmid > R::zero()) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    half * (lo + hi)
}

/// Vertex of the parabola through three points, as `(x, value, curvature)`.
///
/// Returns `None` when the points are collinear enough that no quadratic
/// coefficient can be extracted (coincident abscissae).
pub fn parabola_vertex<R: Real>(
    x0: R,
    y0: R,
    x1: R,
    y1: R,
    x2: R,
    y2: R,
) -> Option<(R, R, R)> {
    let d01 = x0 - x1;
    let d02 = x0 - x2;
    let d12 = x1 - x2;
    if d01 == R::zero() || d02 == R::zero() || d12 == R::zero() {
        return None;
    }
    // y = a x^2 + b x + c through the three samples
    let a = (y0 / (d01 * d02)) - (y1 / (d01 * d12)) + (y2 / (d02 * d12));
    let b = -(y0 * (x1 + x2) / (d01 * d02)) + (y1 * (x0 + x2) / (d01 * d12))
        - (y2 * (x0 + x1) / (d02 * d12));
    if a == R::zero() {
        return None;
    }
    let two = real::<R>(2.0);
    let four = real::<R>(4.0);
    let xv = -b / (two * a);
    let c = y1 - a * x1 * x1 - b * x1;
    let yv = c - b * b / (four * a);
    Some((xv, yv, two * a))
}

/// Central difference with one Richardson step: combines `D(h)` and
/// `D(h/2)` into a fourth-order estimate `(4 D(h/2) - D(h)) / 3`.
pub fn central_diff_richardson<R: Real, F: Fn(R) -> R>(f: F, x: R, h: R) -> R {
    let two = real::<R>(2.0);
    let half = real::<R>(0.5);
    let d_h = (f(x + h) - f(x - h)) / (two * h);
    let d_h2 = (f(x + half * h) - f(x - half * h)) / h;
    (real::<R>(4.0) * d_h2 - d_h) / real::<R>(3.0)
}

/// Plain central difference, `(f(x+h) - f(x-h)) / 2h`.
pub fn central_diff<R: Real, F: Fn(R) -> R>(f: F, x: R, h: R) -> R {
    (f(x + h) - f(x - h)) / (real::<R>(2.0) * h)
}

/// Combine four offset samples `[f(x-h), f(x-h/2), f(x+h/2), f(x+h)]`
/// into the Richardson derivative. Works entrywise for any linear space,
/// hence the scalar-weight form.
pub fn richardson_weights<R: Real>(h: R) -> [R; 4] {
    // (4 * D(h/2) - D(h)) / 3 expressed directly on the samples
    let three = real::<R>(3.0);
    let six = real::<R>(6.0);
    let w_outer = R::one() / (six * h);
    let w_inner = real::<R>(4.0) / (three * h);
    [w_outer, -w_inner, w_inner, -w_outer]
}
