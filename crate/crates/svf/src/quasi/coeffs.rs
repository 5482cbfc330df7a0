//! Quasi-interpolation functional L_p(f)(n) = Σ_j c_{p,j} f_{n+j}.
//!
//! The coefficients are the unique symmetric stencil making
//! Q_p(f) = Σ_n L_p(f)(n) B_p(· − n) reproduce polynomials of degree <= p.
//! They are derived once per degree in exact rational arithmetic: the
//! moments m_a = Σ_n n^a B_p(n) give the power series the B-spline sum
//! applies to a polynomial, the series is inverted, and matching against
//! c_0 + 2 Σ_j c_j cosh(jξ) yields a small linear system.

use std::sync::OnceLock;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::quasi::bspline::{bspline_rational, MAX_DEGREE};

/// Symmetric quasi-interpolation stencil for degree p, exact.
pub fn qi_coeffs_exact(p: usize) -> Result<Vec<BigRational>> {
    if !(2..=MAX_DEGREE).contains(&p) {
        return Err(Error::UnsupportedDegree(p));
    }
    let r = p / 2;

    // moments m_a = Σ_n n^a B_p(n), zero for odd a
    let mut m = vec![BigRational::zero(); p + 1];
    let reach = (p as i64 + 1) / 2 + 1;
    for n in -reach..=reach {
        let b = bspline_rational(p, &BigRational::from_integer(n.into()));
        if b.is_zero() {
            continue;
        }
        let mut power = BigRational::one();
        let nq = BigRational::from_integer(n.into());
        for ma in m.iter_mut() {
            *ma += &power * &b;
            power *= &nq;
        }
    }

    // series M(ξ) = Σ m_a ξ^a / a!, then R = 1/M mod ξ^{p+1}
    let mut fact = vec![BigRational::one(); p + 1];
    for a in 1..=p {
        fact[a] = &fact[a - 1] * BigRational::from_integer((a as i64).into());
    }
    let mm: Vec<BigRational> = (0..=p).map(|a| &m[a] / &fact[a]).collect();
    let mut inv = vec![BigRational::zero(); p + 1];
    inv[0] = BigRational::one();
    for k in 1..=p {
        let mut acc = BigRational::zero();
        for i in 1..=k {
            acc += &mm[i] * &inv[k - i];
        }
        inv[k] = -acc;
    }

    // match c_0 + 2 Σ_{j=1..r} c_j cosh(jξ) against the inverse series:
    // order 0 gives c_0 + 2 Σ c_j = 1, order 2e gives
    // 2 Σ_j c_j j^{2e} / (2e)! = inv[2e]
    let n_unknown = r + 1;
    let mut a = vec![vec![BigRational::zero(); n_unknown + 1]; n_unknown];
    for e in 0..=r {
        let order = 2 * e;
        for j in 0..=r {
            let coef = if e == 0 {
                if j == 0 {
                    BigRational::one()
                } else {
                    BigRational::from_integer(2.into())
                }
            } else if j == 0 {
                BigRational::zero()
            } else {
                let jw = BigRational::from_integer((j as i64).into());
                let mut pw = BigRational::one();
                for _ in 0..order {
                    pw *= &jw;
                }
                BigRational::from_integer(2.into()) * pw / &fact[order]
            };
            a[e][j] = coef;
        }
        a[e][n_unknown] = inv[order].clone();
    }
    let half = solve_rational(&mut a)?;

    let mut out = Vec::with_capacity(2 * r + 1);
    for j in 0..r {
        out.push(half[r - j].clone());
    }
    out.extend(half);
    Ok(out)
}

/// Gaussian elimination with exact pivoting on an augmented rational matrix.
fn solve_rational(a: &mut [Vec<BigRational>]) -> Result<Vec<BigRational>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&row| !a[row][col].is_zero()).ok_or(
            Error::InvalidArgument("singular reproduction system".into()),
        )?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &p;
        }
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let f = a[row][col].clone();
            for c in col..=n {
                let sub = &f * &a[col][c];
                a[row][c] -= sub;
            }
        }
    }
    Ok((0..n).map(|i| a[i][n].clone()).collect())
}

fn to_f64(q: &BigRational) -> f64 {
    let num: f64 = q.numer().to_string().parse().unwrap();
    let den: f64 = q.denom().to_string().parse().unwrap();
    num / den
}

/// Symmetric stencil c_{p,-r}..c_{p,r} as floats, cached per degree.
pub fn qi_coeffs(p: usize) -> Result<&'static [f64]> {
    static CACHE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..=MAX_DEGREE)
            .map(|deg| {
                qi_coeffs_exact(deg)
                    .map(|v| v.iter().map(to_f64).collect())
                    .unwrap_or_default()
            })
            .collect()
    });
    if !(2..=MAX_DEGREE).contains(&p) {
        return Err(Error::UnsupportedDegree(p));
    }
    Ok(&cache[p])
}

/// The local functional together with its degree and knot spacing.
#[derive(Debug, Clone)]
pub struct QIOperator {
    pub p: usize,
    pub coeffs: Vec<f64>,
    pub h: f64,
}

impl QIOperator {
    pub fn new(p: usize, h: f64) -> Result<Self> {
        Ok(QIOperator {
            p,
            coeffs: qi_coeffs(p)?.to_vec(),
            h,
        })
    }

    /// Stencil radius r = ⌊p/2⌋.
    pub fn radius(&self) -> usize {
        self.p / 2
    }

    /// L_p applied to a window of 2r+1 consecutive samples centered at a
    /// node.
    pub fn functional(&self, window: &[f64]) -> f64 {
        debug_assert_eq!(window.len(), self.coeffs.len());
        self.coeffs.iter().zip(window).map(|(c, f)| c * f).sum()
    }

    /// Operator norm bound Σ|c_j| (sup-norm amplification of sample noise).
    pub fn norm_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Q_p applied to samples f(0), f(h), ..., f(1) at a point x of [0,1];
    /// stencil indices beyond the grid use degree-p polynomial extension.
    pub fn apply_1d(&self, samples: &[f64], x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let spline = crate::quasi::tensor::TensorSpline::build(self.p, 1, samples)?;
        Ok(spline.value(&[x]))
    }
}
