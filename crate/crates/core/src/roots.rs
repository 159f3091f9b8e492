//! Scalar root finding.

use crate::error::{LabError, Result};

/// Root of `f` in `[lo, hi]` by Newton steps safeguarded with bisection.
///
/// `f` returns the value and derivative. The bracket must contain a sign
/// change. Iteration stops once the bracket is below `x_tol` (absolute) or an
/// exact zero is hit.
pub fn newton_bisect(
    f: impl Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(LabError::NoBracket(format!(
            "no sign change on [{lo:e}, {hi:e}]: f = {flo:e}, {fhi:e}"
        )));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        if (hi - lo).abs() <= x_tol {
            return Ok(0.5 * (lo + hi));
        }
        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton.is_finite() && newton > lo.min(hi) && newton < lo.max(hi) {
            newton
        } else {
            0.5 * (lo + hi)
        };
        // converged Newton steps stop moving
        if x == lo || x == hi {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Plain bisection on a sign change, to full floating-point resolution.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(LabError::NoBracket(format!("no sign change on [{lo:e}, {hi:e}]")));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root_of_two() {
        let r = newton_bisect(|x| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 4e-16);
    }

    #[test]
    fn survives_bad_derivatives() {
        // derivative vanishes at the start point
        let r = newton_bisect(|x: f64| (x.powi(3) - 0.001, 0.0), -1.0, 1.0, 1e-14, 200).unwrap();
        assert!((r - 0.1).abs() < 1e-13);
    }

    #[test]
    fn reports_missing_bracket() {
        assert!(newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12, 50).is_err());
    }
}
