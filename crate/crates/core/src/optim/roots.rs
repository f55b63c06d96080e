use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// Bisection on `[lo, hi]`.
///
/// Stops when `|f(x)| <= tol` or the bracket is narrower than `tol`; the
/// returned point always lies inside the initial bracket.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::invalid(format!("bisection bracket [{lo}, {hi}] is not a finite interval")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("bisection tolerance must be positive"));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Numerical("function is NaN at a bracket end".into()));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 || fm.abs() <= tol || (b - a) <= tol {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
