//! One-dimensional root finding and maximization.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` (absolute).
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bisection needs lo < hi and tol > 0 (got [{lo}, {hi}], tol {tol})"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    // 2^-200 of any sane bracket is below f64 resolution.
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenSectionResult {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Converges to a local maximum when `f` is unimodal on the bracket; the
/// returned point is the best one evaluated, so the result never falls below
/// the interior probes.
pub fn golden_section_max<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<GoldenSectionResult> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "golden-section search needs a finite bracket lo <= hi and tol > 0 (got [{lo}, {hi}], tol {tol})"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > tol && iterations < 500 {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(GoldenSectionResult {
        x,
        value,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_bracket_without_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
        assert!(bisect(|x| x, 1.0, -1.0, 1e-12).is_err());
    }

    #[test]
    fn golden_section_parabola() {
        let r = golden_section_max(|x| -(x - 0.3).powi(2), -1.0, 2.0, 1e-10).unwrap();
        assert!((r.x - 0.3).abs() < 1e-8);
        assert!(r.iterations > 10);
    }

    #[test]
    fn golden_section_monotone_goes_to_edge() {
        let r = golden_section_max(|x| x, 0.0, 1.0, 1e-9).unwrap();
        assert!(1.0 - r.x < 1e-8);
    }
}
