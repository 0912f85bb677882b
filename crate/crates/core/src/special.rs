//! Gaussian tail functions with relative accuracy deep into the tail.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Beyond this argument `ln_q` switches from `erfc` to the asymptotic series,
/// while `erfc(x/√2)` is still a normal (not subnormal) double.
const ASYMPTOTIC_FROM: f64 = 26.0;

/// Gaussian Q-function, `Pr{Z > x}` for standard normal `Z`.
pub fn q(x: f64) -> f64 {
    if x > ASYMPTOTIC_FROM {
        return ln_q(x).exp();
    }
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    q(-x)
}

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Natural log of `q(x)`, finite for every finite `x`.
pub fn ln_q(x: f64) -> f64 {
    if x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x < 0.0 {
        return (-q(-x)).ln_1p();
    }
    if x <= ASYMPTOTIC_FROM {
        return q(x).ln();
    }
    // Q(x) = φ(x)/x · Σ (-1)^n (2n-1)!! / x^{2n}
    let inv2 = 1.0 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..=10 {
        term *= -((2 * n - 1) as f64) * inv2;
        sum += term;
    }
    -0.5 * x * x - (x * (2.0 * PI).sqrt()).ln() + sum.ln()
}

/// `ln(Φ(b) - Φ(a))` for `a < b`, accurate when both ends sit in the same tail.
///
/// Returns `-inf` for an empty interval.
pub fn ln_gauss_interval(a: f64, b: f64) -> f64 {
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return f64::NEG_INFINITY;
    }
    if a >= 0.0 {
        // Q(a) - Q(b)
        let la = ln_q(a);
        let lb = ln_q(b);
        la + (-(lb - la).exp_m1()).ln()
    } else if b <= 0.0 {
        ln_gauss_interval(-b, -a)
    } else {
        (-(q(-a) + q(b))).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from mpmath at 50 digits.
    #[test]
    fn q_reference_values() {
        assert_eq!(q(0.0), 0.5);
        assert!(rel(q(1.0), 0.15865525393145705) < 1e-13);
        assert!(rel(q(8f64.sqrt()), 0.002_338_867_490_523_633) < 1e-12);
        assert!(rel(q(5.0), 2.866_515_718_791_939e-7) < 1e-12);
        assert!(rel(q(10.0), 7.619_853_024_160_525e-24) < 1e-12);
        assert!(rel(q(-2.0), 0.9772498680518208) < 1e-14);
    }

    #[test]
    fn ln_q_deep_tail() {
        // ln Q(30), ln Q(40), ln Q(100)
        assert!(rel(ln_q(30.0), -454.3212439563432) < 1e-13);
        assert!(rel(ln_q(40.0), -804.608_442_013_753_8) < 1e-13);
        assert!(rel(ln_q(100.0), -5_005.524_208_694_205) < 1e-13);
        // continuity across the switch
        let below = q(ASYMPTOTIC_FROM).ln();
        let above = ln_q(ASYMPTOTIC_FROM + 1e-12);
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn q_is_monotone() {
        let mut prev = 1.0;
        for i in -100..=500 {
            let v = q(i as f64 * 0.1);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn gauss_interval_matches_difference() {
        let cases = [(-1.0, 1.0), (0.5, 2.0), (-3.0, -0.5), (-0.2, 7.0)];
        for (a, b) in cases {
            let direct = phi(b) - phi(a);
            assert!(rel(ln_gauss_interval(a, b).exp(), direct) < 1e-12, "{a} {b}");
        }
        assert!(rel(ln_gauss_interval(-1.0, 1.0).exp(), 0.6826894921370859) < 1e-13);
    }

    #[test]
    fn gauss_interval_far_tail() {
        // Φ(41) - Φ(40) is essentially Q(40).
        let v = ln_gauss_interval(40.0, 41.0);
        assert!(rel(v, ln_q(40.0)) < 1e-12);
        assert_eq!(ln_gauss_interval(-45.0, -40.0), ln_gauss_interval(40.0, 45.0));
        assert_eq!(ln_gauss_interval(1.0, 1.0), f64::NEG_INFINITY);
        assert!(rel(ln_gauss_interval(f64::NEG_INFINITY, f64::INFINITY).exp(), 1.0) < 1e-15);
    }
}
