//! Interpolation of a single boundary curve y(t) over uniformly spaced
//! abscissae: cubic spline with not-a-knot ends, degrading gracefully for
//! very short curves (parabola, line, constant).

use nalgebra::{DMatrix, DVector};

/// Piecewise-polynomial interpolant through (t_0 + i h, y_i).
#[derive(Debug, Clone)]
pub struct Interp1D {
    t0: f64,
    h: f64,
    ys: Vec<f64>,
    /// second derivatives at the knots (cubic case), else empty
    moments: Vec<f64>,
}

impl Interp1D {
    pub fn fit(t0: f64, h: f64, ys: &[f64]) -> Self {
        assert!(!ys.is_empty());
        let n = ys.len();
        let moments = if n >= 4 {
            solve_moments(h, ys)
        } else {
            Vec::new()
        };
        Interp1D {
            t0,
            h,
            ys: ys.to_vec(),
            moments,
        }
    }

    pub fn t_first(&self) -> f64 {
        self.t0
    }

    pub fn t_last(&self) -> f64 {
        self.t0 + self.h * (self.ys.len() - 1) as f64
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ys.len();
        match n {
            1 => self.ys[0],
            2 => {
                let s = (t - self.t0) / self.h;
                self.ys[0] + s * (self.ys[1] - self.ys[0])
            }
            3 => {
                // parabola through the three points
                let s = (t - self.t0) / self.h;
                let (y0, y1, y2) = (self.ys[0], self.ys[1], self.ys[2]);
                y0 + s * (y1 - y0) + s * (s - 1.0) * 0.5 * (y2 - 2.0 * y1 + y0)
            }
            _ => {
                let seg = (((t - self.t0) / self.h).floor() as i64)
                    .clamp(0, n as i64 - 2) as usize;
                let (ta, tb) = (
                    self.t0 + seg as f64 * self.h,
                    self.t0 + (seg + 1) as f64 * self.h,
                );
                let (ma, mb) = (self.moments[seg], self.moments[seg + 1]);
                let (ya, yb) = (self.ys[seg], self.ys[seg + 1]);
                let h = self.h;
                ma * (tb - t).powi(3) / (6.0 * h)
                    + mb * (t - ta).powi(3) / (6.0 * h)
                    + (ya / h - ma * h / 6.0) * (tb - t)
                    + (yb / h - mb * h / 6.0) * (t - ta)
            }
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let n = self.ys.len();
        match n {
            1 => 0.0,
            2 => (self.ys[1] - self.ys[0]) / self.h,
            3 => {
                let s = (t - self.t0) / self.h;
                let (y0, y1, y2) = (self.ys[0], self.ys[1], self.ys[2]);
                ((y1 - y0) + (s - 0.5) * (y2 - 2.0 * y1 + y0)) / self.h
            }
            _ => {
                let seg = (((t - self.t0) / self.h).floor() as i64)
                    .clamp(0, n as i64 - 2) as usize;
                let (ta, tb) = (
                    self.t0 + seg as f64 * self.h,
                    self.t0 + (seg + 1) as f64 * self.h,
                );
                let (ma, mb) = (self.moments[seg], self.moments[seg + 1]);
                let (ya, yb) = (self.ys[seg], self.ys[seg + 1]);
                let h = self.h;
                -ma * (tb - t).powi(2) / (2.0 * h)
                    + mb * (t - ta).powi(2) / (2.0 * h)
                    + (yb - ya) / h
                    - (mb - ma) * h / 6.0
            }
        }
    }
}

/// Second derivatives of the not-a-knot cubic spline on a uniform grid.
fn solve_moments(h: f64, ys: &[f64]) -> Vec<f64> {
    let n = ys.len();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    a[(0, 0)] = 1.0;
    a[(0, 1)] = -2.0;
    a[(0, 2)] = 1.0;
    for i in 1..n - 1 {
        a[(i, i - 1)] = 1.0;
        a[(i, i)] = 4.0;
        a[(i, i + 1)] = 1.0;
        b[i] = 6.0 * (ys[i + 1] - 2.0 * ys[i] + ys[i - 1]) / (h * h);
    }
    a[(n - 1, n - 3)] = 1.0;
    a[(n - 1, n - 2)] = -2.0;
    a[(n - 1, n - 1)] = 1.0;
    let m = a.lu().solve(&b).expect("not-a-knot system is nonsingular");
    m.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_the_samples() {
        let ys: Vec<f64> = (0..9).map(|i| ((i as f64) * 0.7).sin()).collect();
        let s = Interp1D::fit(0.0, 0.125, &ys);
        for (i, &y) in ys.iter().enumerate() {
            assert!((s.eval(0.125 * i as f64) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn reproduces_cubics_exactly() {
        let f = |t: f64| 2.0 * t * t * t - t * t + 0.3 * t - 0.2;
        let ys: Vec<f64> = (0..11).map(|i| f(0.1 * i as f64)).collect();
        let s = Interp1D::fit(0.0, 0.1, &ys);
        let mut t = 0.0f64;
        while t <= 1.0 {
            assert!((s.eval(t) - f(t)).abs() < 1e-12, "t={t}");
            assert!(
                (s.deriv(t) - (6.0 * t * t - 2.0 * t + 0.3)).abs() < 1e-10,
                "t={t}"
            );
            t += 0.0173;
        }
    }

    #[test]
    fn short_curves() {
        let s1 = Interp1D::fit(0.3, 0.1, &[0.7]);
        assert_eq!(s1.eval(0.3), 0.7);
        assert_eq!(s1.eval(0.9), 0.7);

        let s2 = Interp1D::fit(0.0, 0.5, &[0.0, 1.0]);
        assert!((s2.eval(0.25) - 0.5).abs() < 1e-15);

        let f = |t: f64| t * t;
        let s3 = Interp1D::fit(0.0, 0.5, &[f(0.0), f(0.5), f(1.0)]);
        assert!((s3.eval(0.3) - 0.09).abs() < 1e-14);
    }

    #[test]
    fn fourth_order_on_smooth_data() {
        let f = |t: f64| (5.0 * t).sin();
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let ys: Vec<f64> = (0..=n).map(|i| f(h * i as f64)).collect();
            let s = Interp1D::fit(0.0, h, &ys);
            let mut worst = 0.0f64;
            let mut t = 0.0;
            while t <= 1.0 {
                worst = worst.max((s.eval(t) - f(t)).abs());
                t += 1e-3;
            }
            worst
        };
        let ratio = err(16) / err(32);
        assert!(ratio > 11.0, "ratio = {ratio}");
    }
}
