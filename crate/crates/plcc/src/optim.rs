//! Scalar derivative-free maximization.

use crate::real::Real;

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
///
/// Returns `(argmax, max)` with the argument located to absolute tolerance
/// `tol`. Bracketed and derivative-free, so it is robust near parameter
/// bounds where the likelihood flattens.
pub fn golden_section_max<R: Real, F: FnMut(R) -> R>(
    mut f: F,
    lo: R,
    hi: R,
    tol: R,
    max_iter: usize,
) -> (R, R) {
    debug_assert!(lo < hi);
    let inv_phi = R::of(0.618_033_988_749_894_9);
    let mut a = lo;
    let mut b = hi;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a) <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) * R::half();
    let fx = f(x);
    if fx >= fc && fx >= fd {
        (x, fx)
    } else if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
