//! Implicit d-dimensional sets on uniform value grids over [0,1]^d.
//!
//! A set is stored as samples of a function G with the convention that a
//! point belongs to the set iff G >= 0. Slicing restricts G to a hyperplane
//! x_k = tau with local degree-3 interpolation along the sliced axis, and a
//! 1D restriction is converted to an [`IntervalUnion`] by refining the sign
//! changes of the interpolant.

use crate::error::{Error, Result};
use crate::geom::interval::{IntervalUnion, ROOT_TOL};

/// Values of an implicit function G on the uniform grid over [0,1]^d;
/// membership is G >= 0. Row-major storage, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    d: usize,
    n_per_axis: usize,
    values: Vec<f64>,
}

impl GridSet {
    pub fn new(d: usize, n_per_axis: usize, values: Vec<f64>) -> Result<Self> {
        let expected = n_per_axis.pow(d as u32);
        if values.len() != expected {
            return Err(Error::IncompleteGrid {
                expected,
                got: values.len(),
            });
        }
        if d == 0 || n_per_axis < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs d >= 1 and at least 2 nodes per axis, got d={d}, n={n_per_axis}"
            )));
        }
        Ok(GridSet {
            d,
            n_per_axis,
            values,
        })
    }

    pub fn from_fn(d: usize, n_per_axis: usize, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = n_per_axis;
        let total = n.pow(d as u32);
        let step = 1.0 / (n - 1) as f64;
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0f64; d];
        for flat in 0..total {
            let mut rem = flat;
            for a in (0..d).rev() {
                idx[a] = rem % n;
                rem /= n;
            }
            for a in 0..d {
                x[a] = idx[a] as f64 * step;
            }
            values.push(f(&x));
        }
        GridSet { d, n_per_axis, values }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n_per_axis - 1) as f64
    }

    pub fn value_at(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.d);
        let mut flat = 0usize;
        for &i in idx {
            flat = flat * self.n_per_axis + i;
        }
        self.values[flat]
    }

    pub fn node_coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// True when the set has no interior nodes at all.
    pub fn is_node_empty(&self) -> bool {
        self.values.iter().all(|&v| v < 0.0)
    }

    /// Degree-3 separable interpolation of G at an arbitrary point.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        self.interp_rec(x, 0, &mut vec![0usize; self.d])
    }

    fn interp_rec(&self, x: &[f64], axis: usize, idx: &mut Vec<usize>) -> f64 {
        let (base, w) = stencil(self.n_per_axis, x[axis]);
        let mut acc = 0.0;
        for (o, &wo) in w.iter().enumerate() {
            if wo == 0.0 {
                continue;
            }
            idx[axis] = base + o;
            let v = if axis + 1 == self.d {
                self.value_at(idx)
            } else {
                self.interp_rec(x, axis + 1, idx)
            };
            acc += wo * v;
        }
        acc
    }

    /// Membership with off-node points resolved by interpolation.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.interpolate(x) >= 0.0
    }

    /// Restrict G to the hyperplane x_k = tau. The result is a grid set of
    /// dimension d-1 over the remaining axes (same resolution).
    pub fn slice(&self, axis: usize, tau: f64) -> Result<GridSet> {
        if self.d < 2 {
            return Err(Error::DimensionUnsupported(self.d));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::OutOfDomain(tau));
        }
        let n = self.n_per_axis;
        let (base, w) = stencil(n, tau);
        let rd = self.d - 1;
        let total = n.pow(rd as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.d];
        let mut rem_idx = vec![0usize; rd];
        for flat in 0..total {
            let mut rem = flat;
            for a in (0..rd).rev() {
                rem_idx[a] = rem % n;
                rem /= n;
            }
            // scatter remaining indices around the sliced axis
            let mut r = 0;
            for a in 0..self.d {
                if a != axis {
                    idx[a] = rem_idx[r];
                    r += 1;
                }
            }
            let mut acc = 0.0;
            for (o, &wo) in w.iter().enumerate() {
                if wo == 0.0 {
                    continue;
                }
                idx[axis] = base + o;
                acc += wo * self.value_at(&idx);
            }
            out.push(acc);
        }
        GridSet::new(rd, n, out)
    }

    /// Convert a 1D restriction into an interval union by refining every
    /// sign change of the degree-3 interpolant (bisection bracketing with a
    /// Newton polish on the local cubic).
    pub fn to_interval_union(&self) -> Result<IntervalUnion> {
        if self.d != 1 {
            return Err(Error::DimensionUnsupported(self.d));
        }
        let n = self.n_per_axis;
        let f = |x: f64| self.interpolate(&[x]);
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut j = 0usize;
        while j < n {
            if self.values[j] < 0.0 {
                j += 1;
                continue;
            }
            // run of inside nodes [j, k]
            let mut k = j;
            while k + 1 < n && self.values[k + 1] >= 0.0 {
                k += 1;
            }
            let lo = if j == 0 {
                0.0
            } else {
                refine_boundary(&f, self.node_coord(j - 1), self.node_coord(j))?
            };
            let hi = if k == n - 1 {
                1.0
            } else {
                refine_boundary(&f, self.node_coord(k + 1), self.node_coord(k))?
            };
            out.push((lo.min(hi), hi.max(lo)));
            j = k + 1;
        }
        Ok(IntervalUnion::new(out))
    }

    /// Slice to dimension d-1 and, when that lands at one variable, convert
    /// straight to an interval union.
    pub fn slice_to_intervals(&self, axis: usize, tau: f64) -> Result<IntervalUnion> {
        let restricted = self.slice(axis, tau)?;
        if restricted.dim() != 1 {
            return Err(Error::DimensionUnsupported(restricted.dim()));
        }
        restricted.to_interval_union()
    }
}

/// Local interpolation stencil along one axis: base node index plus weights
/// for up to four consecutive nodes (degree 3 where the grid allows it).
fn stencil(n: usize, x: f64) -> (usize, [f64; 4]) {
    let step = 1.0 / (n - 1) as f64;
    let u_global = (x / step).clamp(0.0, (n - 1) as f64);
    if n >= 4 {
        let cell = (u_global.floor() as usize).min(n - 2);
        let base = cell.saturating_sub(1).min(n - 4);
        let u = u_global - base as f64;
        let w = [
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        ];
        (base, w)
    } else if n == 3 {
        let u = u_global;
        let w = [
            (u - 1.0) * (u - 2.0) / 2.0,
            -u * (u - 2.0),
            u * (u - 1.0) / 2.0,
            0.0,
        ];
        (0, w)
    } else {
        let u = u_global;
        (0, [1.0 - u, u, 0.0, 0.0])
    }
}

/// Root of `f` between `outside` (f < 0) and `inside` (f >= 0); the
/// bracket orientation is free. Bisection keeps the bracket valid, a short
/// Newton phase with a finite-difference slope polishes the result.
fn refine_boundary(f: &impl Fn(f64) -> f64, outside: f64, inside: f64) -> Result<f64> {
    let (mut neg, mut pos) = (outside, inside);
    let fneg = f(neg);
    let fpos = f(pos);
    if !(fneg < 0.0 && fpos >= 0.0) {
        return Err(Error::DegenerateRoot {
            location: 0.5 * (outside + inside),
        });
    }
    if fpos == 0.0 {
        return Ok(pos);
    }
    for _ in 0..40 {
        let mid = 0.5 * (neg + pos);
        if (pos - neg).abs() <= ROOT_TOL {
            return Ok(mid);
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(Error::DegenerateRoot { location: mid });
        }
        if fm >= 0.0 {
            pos = mid;
        } else {
            neg = mid;
        }
        // Newton polish once the bracket is narrow enough for the local
        // cubic to be effectively linear.
        if (pos - neg).abs() < 1e-5 {
            let x0 = 0.5 * (neg + pos);
            let eps = 1e-7;
            let df = (f(x0 + eps) - f(x0 - eps)) / (2.0 * eps);
            if df != 0.0 {
                let x1 = x0 - f(x0) / df;
                if x1 > neg.min(pos) && x1 < neg.max(pos) {
                    let f1 = f(x1);
                    if f1 >= 0.0 {
                        pos = x1;
                    } else {
                        neg = x1;
                    }
                }
            }
        }
    }
    Ok(0.5 * (neg + pos))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_grid(n: usize) -> GridSet {
        GridSet::from_fn(2, n, |x| {
            0.09 - (x[0] - 0.5).powi(2) - (x[1] - 0.5).powi(2)
        })
    }

    #[test]
    fn slice_through_center() {
        let g = circle_grid(33);
        let iu = g.slice_to_intervals(1, 0.5).unwrap();
        assert_eq!(iu.count(), 1);
        let (lo, hi) = iu.intervals()[0];
        assert!((lo - 0.2).abs() < 1e-6, "lo = {lo}");
        assert!((hi - 0.8).abs() < 1e-6, "hi = {hi}");
    }

    #[test]
    fn slice_outside() {
        let g = circle_grid(33);
        let iu = g.slice_to_intervals(1, 0.9).unwrap();
        assert!(iu.is_empty());
    }

    #[test]
    fn slice_off_grid_matches_analytic() {
        let g = circle_grid(33);
        let iu = g.slice_to_intervals(1, 0.7).unwrap();
        assert_eq!(iu.count(), 1);
        let half = (0.09f64 - 0.04).sqrt();
        let (lo, hi) = iu.intervals()[0];
        assert!((lo - (0.5 - half)).abs() < 1e-6, "lo = {lo}");
        assert!((hi - (0.5 + half)).abs() < 1e-6, "hi = {hi}");
    }

    #[test]
    fn on_grid_slice_agrees_with_stored_signs() {
        let g = circle_grid(17);
        let s = g.slice(0, 0.5).unwrap();
        for j in 0..17 {
            let direct = g.value_at(&[8, j]);
            let sliced = s.value_at(&[j]);
            assert!((direct - sliced).abs() < 1e-12);
            assert_eq!(direct >= 0.0, sliced >= 0.0);
        }
    }

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let g = GridSet::from_fn(2, 9, |x| {
            x[0].powi(3) - 2.0 * x[1].powi(2) * x[0] + 0.25
        });
        for &(x, y) in &[(0.13f64, 0.77f64), (0.5, 0.51), (0.98, 0.02)] {
            let exact = x.powi(3) - 2.0 * y * y * x + 0.25;
            assert!((g.interpolate(&[x, y]) - exact).abs() < 1e-12);
        }
    }
}
