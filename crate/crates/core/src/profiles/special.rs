//! Error function and the principal branch of the Lambert W function.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Above this argument `erfc` falls below 1e-16 and `erf` rounds to one.
const ERF_SATURATION: f64 = 6.0;

/// Switch point between the series for `erf` and the continued fraction for `erfc`.
const CF_THRESHOLD: f64 = 2.0;

/// The error function `erf(x) = 2/sqrt(pi) * int_0^x exp(-s^2) ds`.
///
/// Odd symmetry is exact: the sign is split off before evaluation. Absolute
/// error stays below 1e-15 over the real line.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -erf(-x);
    }
    if x >= ERF_SATURATION {
        1.0
    } else if x < CF_THRESHOLD {
        erf_series(x)
    } else {
        1.0 - erfc_continued_fraction(x)
    }
}

/// The complementary error function `1 - erf(x)`, accurate in relative
/// terms for large positive `x`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < CF_THRESHOLD {
        1.0 - erf(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// `erf(x) = 2x/sqrt(pi) e^{-x^2} sum_n (2x^2)^n / (2n+1)!!`.
///
/// Every term is positive, so there is no cancellation for any `x >= 0`.
fn erf_series(x: f64) -> f64 {
    let two_x2 = 2.0 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= two_x2 / f64::from(2 * n + 1);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * x * (-x * x).exp() * sum
}

/// Modified Lentz evaluation of
/// `erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for j in 1..5000 {
        let a = f64::from(j) / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Principal branch `W0` of the Lambert W function (the product-log),
/// solving `w e^w = x` with `w >= -1`.
///
/// Halley iteration from an asymptotic or branch-point starting guess.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch_point = -1.0 / E;
    if x.is_nan() || x < branch_point - 4.0 * f64::EPSILON {
        return Err(Error::Domain {
            function: "lambert_w0",
            x,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let q = E * x + 1.0;
    if q <= 0.0 {
        return Ok(-1.0);
    }

    let mut w = if x < -0.25 {
        let p = (2.0 * q).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p() * (1.0 - x.ln_1p() / (2.0 + x.ln_1p()))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..64 {
        let ew = w.exp();
        let residual = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = residual / (ew * wp1 - (w + 2.0) * residual / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn erf_reference_values() {
        assert_eq!(erf(0.0), 0.0);
        // Reference values from a 50-digit evaluation.
        assert_abs_diff_eq!(erf(1.0), 0.842_700_792_949_714_9, epsilon = 1e-15);
        assert_abs_diff_eq!(erf(0.5), 0.520_499_877_813_046_5, epsilon = 1e-15);
        assert_abs_diff_eq!(erf(2.5), 0.999_593_047_982_555_0, epsilon = 1e-15);
        assert_abs_diff_eq!(erf(6.0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(erf(30.0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn erf_odd_exactly() {
        for i in 0..200 {
            let x = -7.0 + 0.07 * f64::from(i);
            assert_eq!(erf(-x), -erf(x));
        }
    }

    #[test]
    fn erf_continuous_across_branch_switch() {
        let series = erf_series(CF_THRESHOLD);
        let fraction = 1.0 - erfc_continued_fraction(CF_THRESHOLD);
        assert_abs_diff_eq!(series, fraction, epsilon = 1e-15);
        assert_abs_diff_eq!(fraction, 0.995_322_265_018_952_7, epsilon = 1e-15);
    }

    #[test]
    fn erfc_tail_is_relative_accurate() {
        // erfc(5) = 1.5374597944280348502e-12
        let v = erfc(5.0);
        assert!((v / 1.537_459_794_428_034_8e-12 - 1.0).abs() < 1e-13);
        assert_abs_diff_eq!(erfc(-1.0), 1.0 + erf(1.0), epsilon = 1e-15);
    }

    #[test]
    fn lambert_trivial_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(lambert_w0(E).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lambert_w0(-1.0 / E).unwrap(), -1.0, epsilon = 1e-7);
    }

    #[test]
    fn lambert_domain_error() {
        assert!(matches!(
            lambert_w0(-0.5),
            Err(Error::Domain { function: "lambert_w0", .. })
        ));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    /// Bisection on `w e^w - x` over `[0, 10]`, kept apart from the Halley path.
    fn bisect_w(x: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 10.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lambert_matches_bisection() {
        let x = 15.915_49;
        let w = lambert_w0(x).unwrap();
        assert_abs_diff_eq!(w, bisect_w(x), epsilon = 1e-12);
        assert!((w - 2.049_632).abs() < 1e-5);
        for &x in &[0.1, 1.0, 2.0 / PI, 50.0 / PI, 1e3, 1e4] {
            assert_abs_diff_eq!(lambert_w0(x).unwrap(), bisect_w(x), epsilon = 1e-12);
        }
    }
}
