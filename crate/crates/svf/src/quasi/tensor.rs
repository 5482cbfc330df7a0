//! Tensor-product quasi-interpolation splines on uniform grids over
//! [0,1]^D.
//!
//! Building applies the local functional along one axis at a time, widening
//! the coefficient array by the stencil reach; sample indices beyond the
//! grid are filled by degree-p polynomial extension of the nearest p+1
//! samples, so polynomial data stays exact up to the domain boundary.

use crate::error::{Error, Result};
use crate::quasi::bspline::{bspline_deriv, bspline_eval};
use crate::quasi::coeffs::qi_coeffs;

/// Degree-m spline in `dim` variables with coefficients on the extended
/// uniform grid.
#[derive(Debug, Clone)]
pub struct TensorSpline {
    dim: usize,
    degree: usize,
    n_nodes: usize,
    ext: usize,
    coeffs: Vec<f64>,
}

impl TensorSpline {
    /// Build from `values` on the (n)^dim uniform grid (row-major, last
    /// axis fastest); n is inferred from the length.
    pub fn build(degree: usize, dim: usize, values: &[f64]) -> Result<Self> {
        let c = qi_coeffs(degree)?;
        if dim == 0 || dim > 4 {
            return Err(Error::DimensionUnsupported(dim));
        }
        let n = (values.len() as f64).powf(1.0 / dim as f64).round() as usize;
        if n.pow(dim as u32) != values.len() {
            return Err(Error::IncompleteGrid {
                expected: n.pow(dim as u32),
                got: values.len(),
            });
        }
        if n < degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "degree-{degree} spline needs at least {} nodes per axis, got {n}",
                degree + 1
            )));
        }
        let ext = degree / 2;
        let r = degree / 2;
        let mut data = values.to_vec();
        let mut shape = vec![n; dim];
        for axis in 0..dim {
            data = qi_pass(&data, &shape, axis, c, ext, r, degree);
            shape[axis] = n + 2 * ext;
        }
        Ok(TensorSpline {
            dim,
            degree,
            n_nodes: n,
            ext,
            coeffs: data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Nodes per axis of the underlying sample grid.
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Knot spacing h = 1/(n−1).
    pub fn spacing(&self) -> f64 {
        1.0 / (self.n_nodes - 1) as f64
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn ext(&self) -> usize {
        self.ext
    }

    /// Rebuild from a stored coefficient array (archive loading).
    pub fn from_coeffs(
        degree: usize,
        dim: usize,
        n_nodes: usize,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        qi_coeffs(degree)?;
        let ext = degree / 2;
        let per_axis = n_nodes + 2 * ext;
        let expected = per_axis.pow(dim as u32);
        if coeffs.len() != expected {
            return Err(Error::IncompleteGrid {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(TensorSpline {
            dim,
            degree,
            n_nodes,
            ext,
            coeffs,
        })
    }

    fn axis_weights(&self, u: f64, deriv: bool) -> (i64, [f64; 6]) {
        let m = self.degree;
        let n_start = if m % 2 == 1 {
            u.floor() as i64 - (m as i64 - 1) / 2
        } else {
            (u + 0.5).floor() as i64 - m as i64 / 2
        };
        let mut w = [0.0; 6];
        for (k, wk) in w.iter_mut().take(m + 1).enumerate() {
            let arg = u - (n_start + k as i64) as f64;
            *wk = if deriv {
                bspline_deriv(m, arg).unwrap()
            } else {
                bspline_eval(m, arg).unwrap()
            };
        }
        (n_start, w)
    }

    /// Spline value; coordinates are clamped to [0,1] per axis.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.eval(x, None)
    }

    /// Value with a domain check.
    pub fn try_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "spline has {} variables, point has {}",
                self.dim,
                x.len()
            )));
        }
        for &xi in x {
            if !(-1e-12..=1.0 + 1e-12).contains(&xi) {
                return Err(Error::OutOfDomain(xi));
            }
        }
        Ok(self.value(x))
    }

    /// Value and gradient in one pass; `grad` must have `dim` entries.
    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.eval(x, Some(grad))
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.eval(x, Some(&mut g));
        g
    }

    fn eval(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let m = self.degree;
        let nn = self.n_nodes as f64 - 1.0;
        let per_axis = self.n_nodes + 2 * self.ext;

        let mut starts = [0i64; 4];
        let mut wval = [[0.0; 6]; 4];
        let mut wder = [[0.0; 6]; 4];
        let want_grad = grad.is_some();
        for a in 0..self.dim {
            let u = (x[a] * nn).clamp(0.0, nn);
            let (s, w) = self.axis_weights(u, false);
            starts[a] = s;
            wval[a] = w;
            if want_grad {
                let (_, d) = self.axis_weights(u, true);
                wder[a] = d;
            }
        }

        let mut value = 0.0;
        let mut gacc = [0.0f64; 4];
        let mut k = [0usize; 4];
        'outer: loop {
            let mut wprod = 1.0;
            let mut idx = 0usize;
            let mut ok = true;
            for a in 0..self.dim {
                let w = wval[a][k[a]];
                let ci = starts[a] + k[a] as i64 + self.ext as i64;
                if ci < 0 || ci >= per_axis as i64 {
                    ok = w == 0.0;
                    if !ok {
                        debug_assert!(ok, "nonzero weight outside coefficient grid");
                    }
                    wprod = 0.0;
                    break;
                }
                wprod *= w;
                idx = idx * per_axis + ci as usize;
            }
            if ok && wprod != 0.0 {
                let cf = self.coeffs[idx];
                value += wprod * cf;
                if want_grad {
                    for g in 0..self.dim {
                        let mut wp = 1.0;
                        for a in 0..self.dim {
                            wp *= if a == g { wder[a][k[a]] } else { wval[a][k[a]] };
                        }
                        gacc[g] += wp * cf;
                    }
                }
            } else if ok && want_grad {
                // value weight vanished but derivative factors may not
                let idx_full = self.flat_index(&starts, &k, per_axis);
                if let Some(idx) = idx_full {
                    let cf = self.coeffs[idx];
                    for g in 0..self.dim {
                        let mut wp = 1.0;
                        for a in 0..self.dim {
                            wp *= if a == g { wder[a][k[a]] } else { wval[a][k[a]] };
                        }
                        gacc[g] += wp * cf;
                    }
                }
            }
            // advance multi-index over the (m+1)^dim stencil
            let mut a = self.dim;
            loop {
                if a == 0 {
                    break 'outer;
                }
                a -= 1;
                if k[a] < m {
                    k[a] += 1;
                    for kb in k.iter_mut().skip(a + 1) {
                        *kb = 0;
                    }
                    continue 'outer;
                }
            }
        }
        if let Some(g) = grad {
            for a in 0..self.dim {
                g[a] = gacc[a] * nn;
            }
        }
        value
    }

    fn flat_index(&self, starts: &[i64; 4], k: &[usize; 4], per_axis: usize) -> Option<usize> {
        let mut idx = 0usize;
        for a in 0..self.dim {
            let ci = starts[a] + k[a] as i64 + self.ext as i64;
            if ci < 0 || ci >= per_axis as i64 {
                return None;
            }
            idx = idx * per_axis + ci as usize;
        }
        Some(idx)
    }
}

/// One quasi-interpolation sweep along `axis`, widening that axis by `ext`
/// coefficient nodes on each side.
fn qi_pass(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    c: &[f64],
    ext: usize,
    r: usize,
    degree: usize,
) -> Vec<f64> {
    let len = shape[axis];
    let out_len = len + 2 * ext;
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let block = len * stride;

    let mut out_shape: Vec<usize> = shape.to_vec();
    out_shape[axis] = out_len;
    let out_block = out_len * stride;
    let mut out = vec![0.0; outer * out_block];

    let mut line = vec![0.0; len];
    for o in 0..outer {
        for i in 0..stride {
            let base = o * block + i;
            for (k, lk) in line.iter_mut().enumerate() {
                *lk = data[base + k * stride];
            }
            let obase = o * out_block + i;
            for m in 0..out_len {
                let center = m as i64 - ext as i64;
                let mut acc = 0.0;
                for (ji, cj) in c.iter().enumerate() {
                    let j = ji as i64 - r as i64;
                    acc += cj * sample_extended(&line, center + j, degree);
                }
                out[obase + m * stride] = acc;
            }
        }
    }
    out
}

/// Sample with degree-p polynomial extension beyond the ends.
fn sample_extended(line: &[f64], i: i64, p: usize) -> f64 {
    let n = line.len() as i64;
    if (0..n).contains(&i) {
        return line[i as usize];
    }
    let (nodes_start, t) = if i < 0 {
        (0i64, i)
    } else {
        (n - 1 - p as i64, i)
    };
    let mut acc = 0.0;
    for k in 0..=p as i64 {
        let node = nodes_start + k;
        let mut w = 1.0;
        for l in 0..=p as i64 {
            if l != k {
                w *= (t - (nodes_start + l)) as f64 / (node - (nodes_start + l)) as f64;
            }
        }
        acc += w * line[node as usize];
    }
    acc
}

/// One-shot tensor quasi-interpolation of a value grid at a point.
pub fn qi_apply_tensor(degree: usize, dim: usize, values: &[f64], x: &[f64]) -> Result<f64> {
    TensorSpline::build(degree, dim, values)?.try_value(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn grid_1d(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn cubic_reproduced_at_half() {
        let samples = grid_1d(17, |x| x * x * x);
        let s = TensorSpline::build(3, 1, &samples).unwrap();
        assert!((s.value(&[0.5]) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn monomials_reproduced_up_to_degree() {
        for p in 2..=5 {
            for q in 0..=p {
                let samples = grid_1d(13, |x| x.powi(q as i32));
                let s = TensorSpline::build(p, 1, &samples).unwrap();
                let mut x = 0.0f64;
                while x <= 1.0 {
                    let want = x.powi(q as i32);
                    assert!(
                        (s.value(&[x]) - want).abs() < 1e-10,
                        "p={p}, q={q}, x={x}"
                    );
                    x += 0.0173;
                }
            }
        }
    }

    #[test]
    fn sine_error_shrinks_at_fourth_order() {
        let err = |n: usize| {
            let samples = grid_1d(n + 1, |x| (std::f64::consts::TAU * x).sin());
            let s = TensorSpline::build(3, 1, &samples).unwrap();
            let mut worst = 0.0f64;
            let mut x = 0.25;
            while x <= 0.75 {
                let want = (std::f64::consts::TAU * x).sin();
                worst = worst.max((s.value(&[x]) - want).abs());
                x += 1e-3;
            }
            worst
        };
        let (e1, e2) = (err(32), err(64));
        let ratio = e1 / e2;
        assert!((12.0..22.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn trivariate_polynomial_exact() {
        let n = 9;
        let mut values = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (x, y, z) = (
                        i as f64 / (n - 1) as f64,
                        j as f64 / (n - 1) as f64,
                        k as f64 / (n - 1) as f64,
                    );
                    values.push(x * x * y - z);
                }
            }
        }
        let s = TensorSpline::build(3, 3, &values).unwrap();
        for &(x, y, z) in &[(0.0, 0.0, 0.0), (0.21, 0.53, 0.87), (1.0, 1.0, 0.4)] {
            let want = x * x * y - z;
            assert!((s.value(&[x, y, z]) - want).abs() < 1e-10, "({x},{y},{z})");
        }
    }

    #[test]
    fn constant_grid_gives_constant_spline() {
        let s = TensorSpline::build(3, 2, &vec![2.5; 81]).unwrap();
        for &p in &[[0.0, 0.0], [0.5, 0.3], [1.0, 1.0], [0.99, 0.01]] {
            assert!((s.value(&p) - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_bump_order_four_in_3d() {
        let f = |x: f64, y: f64, z: f64| {
            (-((x - 0.5).powi(2) + (y - 0.5).powi(2) + (z - 0.5).powi(2)) / 0.08).exp()
        };
        let err = |n: usize| {
            let mut values = Vec::new();
            for i in 0..=n {
                for j in 0..=n {
                    for k in 0..=n {
                        values.push(f(
                            i as f64 / n as f64,
                            j as f64 / n as f64,
                            k as f64 / n as f64,
                        ));
                    }
                }
            }
            let s = TensorSpline::build(3, 3, &values).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            let mut worst = 0.0f64;
            for _ in 0..300 {
                let p = [
                    rng.gen_range(0.25..0.75),
                    rng.gen_range(0.25..0.75),
                    rng.gen_range(0.25..0.75),
                ];
                worst = worst.max((s.value(&p) - f(p[0], p[1], p[2])).abs());
            }
            worst
        };
        let ratio = err(16) / err(32);
        assert!(ratio > 10.0, "ratio = {ratio}");
    }

    #[test]
    fn noise_amplification_bounded_by_operator_norm() {
        let op = crate::quasi::coeffs::QIOperator::new(3, 1.0 / 16.0).unwrap();
        let norm = op.norm_bound();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let clean = grid_1d(17, |x| (3.0 * x).cos());
        let eps = 1e-3;
        let noisy: Vec<f64> = clean
            .iter()
            .map(|v| v + rng.gen_range(-eps..eps))
            .collect();
        let s0 = TensorSpline::build(3, 1, &clean).unwrap();
        let s1 = TensorSpline::build(3, 1, &noisy).unwrap();
        let mut x = 0.2;
        while x <= 0.8 {
            let d = (s0.value(&[x]) - s1.value(&[x])).abs();
            assert!(d <= norm * eps * (1.0 + 1e-9), "x={x}: {d} vs {}", norm * eps);
            x += 0.013;
        }
    }

    #[test]
    fn evaluation_is_local() {
        let base = grid_1d(33, |x| x.sin());
        let mut bumped = base.clone();
        bumped[30] += 5.0;
        let s0 = TensorSpline::build(3, 1, &base).unwrap();
        let s1 = TensorSpline::build(3, 1, &bumped).unwrap();
        // node 30 sits at x = 30/32; points with |n - x/h| > p+1 see nothing
        let x = 0.5;
        assert_eq!(s0.value(&[x]), s1.value(&[x]));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let n = 17;
        let mut values = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
                values.push((2.0 * x + 0.5).sin() * (3.0 * y).cos());
            }
        }
        let s = TensorSpline::build(3, 2, &values).unwrap();
        for &p in &[[0.3, 0.4], [0.5, 0.5], [0.7, 0.2]] {
            let g = s.gradient(&p);
            let eps = 1e-6;
            for a in 0..2 {
                let mut hi = p;
                let mut lo = p;
                hi[a] += eps;
                lo[a] -= eps;
                let fd = (s.value(&hi) - s.value(&lo)) / (2.0 * eps);
                assert!((g[a] - fd).abs() < 1e-6, "axis {a} at {p:?}: {} vs {fd}", g[a]);
            }
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        let samples = grid_1d(9, |x| x);
        let s = TensorSpline::build(3, 1, &samples).unwrap();
        assert!(matches!(s.try_value(&[1.2]), Err(Error::OutOfDomain(_))));
        assert!(qi_apply_tensor(3, 1, &samples, &[-0.1]).is_err());
    }

    #[test]
    fn incomplete_grid_rejected() {
        let values = vec![0.0; 80];
        assert!(matches!(
            TensorSpline::build(3, 2, &values),
            Err(Error::IncompleteGrid { .. })
        ));
    }
}
