//! Centered cardinal B-splines on uniform knots.
//!
//! B_p is supported on [-(p+1)/2, (p+1)/2] and evaluated by the stable
//! two-term recursion; the rational variant runs the same recursion in
//! exact arithmetic for the coefficient derivation.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 5;

/// Value of the degree-p centered B-spline at u.
pub fn bspline_eval(p: usize, u: f64) -> Result<f64> {
    if p == 0 || p > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(p));
    }
    Ok(eval_rec(p, u))
}

fn eval_rec(p: usize, u: f64) -> f64 {
    if p == 0 {
        // half-open box keeps the recursion single-valued at knots
        return if (-0.5..0.5).contains(&u) { 1.0 } else { 0.0 };
    }
    if u.abs() >= (p as f64 + 1.0) / 2.0 {
        return 0.0;
    }
    let k = (p as f64 + 1.0) / 2.0;
    ((u + k) * eval_rec(p - 1, u + 0.5) + (k - u) * eval_rec(p - 1, u - 0.5)) / p as f64
}

/// Derivative of the degree-p centered B-spline at u.
pub fn bspline_deriv(p: usize, u: f64) -> Result<f64> {
    if p == 0 || p > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(p));
    }
    if p == 1 {
        // piecewise-constant slope of the hat
        return Ok(if u.abs() >= 1.0 {
            0.0
        } else if u < 0.0 {
            1.0
        } else {
            -1.0
        });
    }
    Ok(eval_rec(p - 1, u + 0.5) - eval_rec(p - 1, u - 0.5))
}

/// Exact value of B_p at a rational argument.
pub fn bspline_rational(p: usize, u: &BigRational) -> BigRational {
    let half = BigRational::new(1.into(), 2.into());
    if p == 0 {
        return if u >= &(-half.clone()) && u < &half {
            BigRational::one()
        } else {
            BigRational::zero()
        };
    }
    let two = BigRational::from_integer(2.into());
    let half_support = BigRational::from_integer(((p + 1) as i64).into()) / &two;
    if u.abs() >= half_support {
        return BigRational::zero();
    }
    let up = u + &half;
    let um = u - &half;
    let left = (u + &half_support) * bspline_rational(p - 1, &up);
    let right = (&half_support - u) * bspline_rational(p - 1, &um);
    (left + right) / BigRational::from_integer((p as i64).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cox-de Boor on the explicit uniform knot vector, as an independent
    /// check of the centered recursion.
    fn cox_de_boor(p: usize, x: f64) -> f64 {
        // knots 0..=p+1, basis function N_{0,p}, shifted so it centers at 0
        fn n(i: usize, p: usize, x: f64) -> f64 {
            if p == 0 {
                return if x >= i as f64 && x < (i + 1) as f64 { 1.0 } else { 0.0 };
            }
            let a = (x - i as f64) / p as f64 * n(i, p - 1, x);
            let b = ((i + p + 1) as f64 - x) / p as f64 * n(i + 1, p - 1, x);
            a + b
        }
        n(0, p, x + (p as f64 + 1.0) / 2.0)
    }

    #[test]
    fn matches_cox_de_boor() {
        for p in 1..=MAX_DEGREE {
            let mut u = -3.1;
            while u < 3.1 {
                let got = bspline_eval(p, u).unwrap();
                let want = cox_de_boor(p, u);
                assert!((got - want).abs() < 1e-13, "p={p}, u={u}: {got} vs {want}");
                u += 0.0137;
            }
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(bspline_eval(1, 0.0).unwrap(), 1.0);
        assert!((bspline_eval(3, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(bspline_eval(3, 2.0).unwrap(), 0.0);
        assert_eq!(bspline_eval(3, -2.0).unwrap(), 0.0);
        assert!((bspline_eval(2, 0.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((bspline_eval(2, 1.0).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn partition_of_unity() {
        for p in 1..=MAX_DEGREE {
            for &x in &[0.0f64, 0.3, 0.5, 0.77] {
                let s: f64 = (-5..=5)
                    .map(|n| bspline_eval(p, x - n as f64).unwrap())
                    .sum();
                assert!((s - 1.0).abs() < 1e-13, "p={p}, x={x}: {s}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for p in 2..=MAX_DEGREE {
            let mut u = -3.0;
            while u < 3.0 {
                let eps = 1e-6;
                let fd = (eval_rec(p, u + eps) - eval_rec(p, u - eps)) / (2.0 * eps);
                let got = bspline_deriv(p, u).unwrap();
                assert!((got - fd).abs() < 1e-8, "p={p}, u={u}: {got} vs {fd}");
                u += 0.0193;
            }
        }
    }

    #[test]
    fn rational_agrees_with_float() {
        for p in 1..=MAX_DEGREE {
            for n in -4i64..=4 {
                let q = BigRational::from_integer(n.into());
                let exact = bspline_rational(p, &q);
                let num: f64 = exact.numer().to_string().parse().unwrap();
                let den: f64 = exact.denom().to_string().parse().unwrap();
                let f = bspline_eval(p, n as f64).unwrap();
                assert!((num / den - f).abs() < 1e-14, "p={p}, n={n}");
            }
        }
    }

    #[test]
    fn degree_zero_and_oversize_rejected() {
        assert!(matches!(bspline_eval(0, 0.0), Err(Error::UnsupportedDegree(0))));
        assert!(matches!(bspline_eval(6, 0.0), Err(Error::UnsupportedDegree(6))));
    }
}
