use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;
const INITIAL_PANELS: usize = 4;

/// Adaptive Simpson quadrature of `f` over `[lo, hi]`.
pub fn integrate<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_with_breaks(f, lo, hi, &[], tol)
}

/// Adaptive Simpson with the interval split at known kinks first.
///
/// Breakpoints outside `(lo, hi)` are ignored. The tolerance is shared
/// between pieces in proportion to their width.
pub fn integrate_with_breaks<F>(f: F, lo: f64, hi: f64, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid("integration limits must be finite"));
    }
    if lo > hi {
        return Err(Error::invalid(format!("integration limits reversed: {lo} > {hi}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("integration tolerance must be positive"));
    }
    if lo == hi {
        return Ok(0.0);
    }
    let mut knots: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lo && *b < hi)
        .collect();
    knots.push(lo);
    knots.push(hi);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();

    let width = hi - lo;
    let mut total = 0.0;
    for piece in knots.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        let piece_tol = tol * (b - a) / width;
        let h = (b - a) / INITIAL_PANELS as f64;
        for k in 0..INITIAL_PANELS {
            let l = a + h * k as f64;
            let r = if k + 1 == INITIAL_PANELS { b } else { l + h };
            total += simpson_panel(&f, l, r, piece_tol / INITIAL_PANELS as f64)?;
        }
    }
    Ok(total)
}

fn simpson_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numerical(format!("non-finite integrand on [{a}, {b}]")))
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_integrand() {
        assert!((integrate(|t| t, 0.0, 1.0, 1e-12).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pooled_interval_sender_loss() {
        let y = 0.4481;
        let v = integrate(|t| (y / 2.0 - t).powi(2), 0.0, y, 1e-13).unwrap();
        assert!((v - y.powi(3) / 12.0).abs() < 1e-13);
        assert!((v - 0.0075).abs() < 1e-5);
    }

    #[test]
    fn truncation_receiver_loss() {
        let x = 0.6893;
        let v = integrate(|t| (x - t).powi(2), x, 1.0, 1e-13).unwrap();
        assert!((v - (1.0 - x).powi(3) / 3.0).abs() < 1e-13);
        assert!((v - 0.01).abs() < 1e-5);
    }

    #[test]
    fn kinked_integrand_with_breakpoint() {
        let k = 0.3137;
        let f = |t: f64| (t - k).abs().powi(3) + if t < k { 1.0 } else { 0.0 };
        let exact = (k.powi(4) + (1.0 - k).powi(4)) / 4.0 + k;
        let v = integrate_with_breaks(f, 0.0, 1.0, &[k], 1e-12).unwrap();
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn halving_tolerance_is_stable() {
        let f = |t: f64| (3.0 * t).sin() * (-t).exp();
        let mut tol = 1e-4;
        let mut prev = integrate(f, 0.0, 2.0, tol).unwrap();
        for _ in 0..8 {
            tol *= 0.5;
            let next = integrate(f, 0.0, 2.0, tol).unwrap();
            assert!((next - prev).abs() <= 2.0 * tol);
            prev = next;
        }
    }

    #[test]
    fn reversed_limits_rejected() {
        assert!(integrate(|t| t, 1.0, 0.0, 1e-9).unwrap_err().is_validation());
        assert_eq!(integrate(|t| t, 0.5, 0.5, 1e-9).unwrap(), 0.0);
    }
}
