//! Analytic test shapes with known membership, boundaries and topology
//! changes, plus the error measurements the test suite is built on.
//!
//! Every phantom provides a per-slice scalar field whose sign gives
//! membership, so the same shape can be sampled as interval unions (d = 1)
//! or as implicit grids (d >= 2). Where the field is an exact in-plane
//! distance this is noted; otherwise only the zero set is meaningful.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::cloud::{PointCloud, PointTag};
use crate::geom::grid::GridSet;
use crate::geom::interval::{hausdorff_1d, IntervalUnion};
use crate::geom::sampled::{Pct, PctKind, SampleSet, SampledSVF};
use crate::quasi::marching::LevelSet;
use crate::reconstruct::{project_to_zero, GraphApproximant, Stage2Slice};
use crate::svf1d::SVF1DApproximant;

/// Regularity of the graph boundary away from topology changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Smooth,
    Piecewise,
}

/// An analytic set-valued function on [0,1] with images in [0,1]^d.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub name: &'static str,
    pub dim: usize,
    pub smoothness: Smoothness,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    /// Disk in the (t, y) plane; images are single intervals.
    Disk1 { ct: f64, cy: f64, r: f64 },
    /// Two disjoint disks; image count changes 0 -> 1 -> 2 -> 1 -> 0.
    TwoDisks1 { a: (f64, f64, f64), b: (f64, f64, f64) },
    /// Full slab [0,1] minus a disk-shaped hole (two fold points).
    HoleDisk1 { ct: f64, cy: f64, r: f64 },
    /// Full slab minus a lens between two crossing parabolas.
    HoleLens1 { t0: f64, t1: f64, cy: f64, amp: f64 },
    /// Slab minus one disk hole and one lens hole (mixed fold/crossing).
    DoubleHole1 { disk: (f64, f64, f64), lens: (f64, f64, f64, f64) },
    /// Two smooth bands with no topology changes at all.
    Bands1,
    /// Ball in ambient (t, x) space; works for any image dimension.
    Ball { c: Vec<f64>, r: f64 },
    /// Axis-aligned ellipsoid; the field is algebraic, not a distance.
    Ellipsoid { c: Vec<f64>, semi: Vec<f64> },
    /// Torus around the t-axis through (0.5, 0.5); slices are annuli.
    Torus { major: f64, minor: f64 },
    /// Union of two overlapping balls of equal radius.
    TwoBalls { c1: Vec<f64>, c2: Vec<f64>, r: f64 },
}

fn signed_sqrt(a: f64) -> f64 {
    a.signum() * a.abs().sqrt()
}

fn hypot_n(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Phantom {
    pub fn ambient_dim(&self) -> usize {
        self.dim + 1
    }

    /// Whether [`Phantom::slice_value`] returns an exact in-slice signed
    /// distance, which the set-metric oracles below require.
    pub fn has_exact_slice_distance(&self) -> bool {
        matches!(self.kind, Kind::Ball { .. } | Kind::Torus { .. })
    }

    /// Scalar field of the image at abscissa `t`, positive inside.
    ///
    /// For `disk`, `ball`, `torus` and their unions the value is the exact
    /// distance to the slice boundary within the slice plane (up to sign);
    /// for the others only the sign and the zero set are meaningful.
    pub fn slice_value(&self, t: f64, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Disk1 { ct, cy, r } => {
                let w = signed_sqrt(r * r - (t - ct) * (t - ct));
                w - (x[0] - cy).abs()
            }
            Kind::TwoDisks1 { a, b } => {
                let v = |d: &(f64, f64, f64)| {
                    let w = signed_sqrt(d.2 * d.2 - (t - d.0) * (t - d.0));
                    w - (x[0] - d.1).abs()
                };
                v(a).max(v(b))
            }
            Kind::HoleDisk1 { ct, cy, r } => ((t - ct).hypot(x[0] - cy)) - r,
            Kind::HoleLens1 { t0, t1, cy, amp } => lens_value(t, x[0], *t0, *t1, *cy, *amp),
            Kind::DoubleHole1 { disk, lens } => {
                let vd = (t - disk.0).hypot(x[0] - disk.1) - disk.2;
                let vl = lens_value(t, x[0], lens.0, lens.1, lens.2, lens.3);
                vd.min(vl)
            }
            Kind::Bands1 => {
                let (u, v) = band_edges(t);
                (u - x[0]).max(x[0] - v)
            }
            Kind::Ball { c, r } => {
                let w = signed_sqrt(r * r - (t - c[0]) * (t - c[0]));
                let dx: Vec<f64> = x.iter().zip(&c[1..]).map(|(a, b)| a - b).collect();
                w - hypot_n(&dx)
            }
            Kind::Ellipsoid { c, semi } => {
                let mut s = ((t - c[0]) / semi[0]).powi(2);
                for i in 0..x.len() {
                    s += ((x[i] - c[i + 1]) / semi[i + 1]).powi(2);
                }
                1.0 - s
            }
            Kind::Torus { major, minor } => {
                let rho = (x[0] - 0.5).hypot(x[1] - 0.5);
                let w = signed_sqrt(minor * minor - (t - 0.5) * (t - 0.5));
                w - (rho - major).abs()
            }
            Kind::TwoBalls { c1, c2, r } => {
                let v = |c: &[f64]| {
                    let w = signed_sqrt(r * r - (t - c[0]) * (t - c[0]));
                    let dx: Vec<f64> = x.iter().zip(&c[1..]).map(|(a, b)| a - b).collect();
                    w - hypot_n(&dx)
                };
                v(c1).max(v(c2))
            }
        }
    }

    pub fn membership(&self, t: f64, x: &[f64]) -> bool {
        self.slice_value(t, x) >= 0.0
    }

    /// Signed distance to the graph boundary in ambient space, positive
    /// inside, where a closed form exists. Unions are exact away from
    /// the weld seam and overestimate inside near it.
    pub fn signed_distance(&self, p: &[f64]) -> Option<f64> {
        debug_assert_eq!(p.len(), self.ambient_dim());
        match &self.kind {
            Kind::Disk1 { ct, cy, r } => Some(r - (p[0] - ct).hypot(p[1] - cy)),
            Kind::TwoDisks1 { a, b } => {
                let s = |d: &(f64, f64, f64)| d.2 - (p[0] - d.0).hypot(p[1] - d.1);
                Some(s(a).max(s(b)))
            }
            Kind::Ball { c, r } => {
                let dx: Vec<f64> = p.iter().zip(c).map(|(a, b)| a - b).collect();
                Some(r - hypot_n(&dx))
            }
            Kind::Torus { major, minor } => {
                let rho = (p[1] - 0.5).hypot(p[2] - 0.5);
                Some(minor - (rho - major).hypot(p[0] - 0.5))
            }
            Kind::TwoBalls { c1, c2, r } => {
                let s = |c: &[f64]| {
                    let dx: Vec<f64> = p.iter().zip(c).map(|(a, b)| a - b).collect();
                    r - hypot_n(&dx)
                };
                Some(s(c1).max(s(c2)))
            }
            _ => None,
        }
    }

    /// Exact image at `t` for interval-valued phantoms.
    pub fn interval_union(&self, t: f64) -> Result<IntervalUnion> {
        if self.dim != 1 {
            return Err(Error::DimensionUnsupported(self.dim));
        }
        Ok(match &self.kind {
            Kind::Disk1 { ct, cy, r } => disk_interval(t, *ct, *cy, *r),
            Kind::TwoDisks1 { a, b } => {
                let mut iv: Vec<(f64, f64)> =
                    disk_interval(t, a.0, a.1, a.2).intervals().to_vec();
                iv.extend_from_slice(disk_interval(t, b.0, b.1, b.2).intervals());
                IntervalUnion::new(iv)
            }
            Kind::HoleDisk1 { ct, cy, r } => {
                disk_interval(t, *ct, *cy, *r).complement(0.0, 1.0)
            }
            Kind::HoleLens1 { t0, t1, cy, amp } => {
                lens_interval(t, *t0, *t1, *cy, *amp).complement(0.0, 1.0)
            }
            Kind::DoubleHole1 { disk, lens } => {
                let mut gaps: Vec<(f64, f64)> =
                    disk_interval(t, disk.0, disk.1, disk.2).intervals().to_vec();
                gaps.extend_from_slice(
                    lens_interval(t, lens.0, lens.1, lens.2, lens.3).intervals(),
                );
                IntervalUnion::new(gaps).complement(0.0, 1.0)
            }
            Kind::Bands1 => {
                let (u, v) = band_edges(t);
                IntervalUnion::new([(0.0, u), (v, 1.0)])
            }
            _ => unreachable!("interval phantoms are one dimensional"),
        })
    }

    /// Analytic topology change points; empty for d >= 2 phantoms.
    pub fn pcts(&self) -> Vec<Pct> {
        let fold = |t, y| Pct { t, y, kind: PctKind::Fold };
        let cross = |t, y| Pct { t, y, kind: PctKind::Crossing };
        match &self.kind {
            Kind::Disk1 { ct, cy, r } => vec![fold(ct - r, *cy), fold(ct + r, *cy)],
            Kind::TwoDisks1 { a, b } => vec![
                fold(a.0 - a.2, a.1),
                fold(b.0 - b.2, b.1),
                fold(a.0 + a.2, a.1),
                fold(b.0 + b.2, b.1),
            ],
            Kind::HoleDisk1 { ct, cy, r } => vec![fold(ct - r, *cy), fold(ct + r, *cy)],
            Kind::HoleLens1 { t0, t1, cy, .. } => vec![cross(*t0, *cy), cross(*t1, *cy)],
            Kind::DoubleHole1 { disk, lens } => vec![
                fold(disk.0 - disk.2, disk.1),
                fold(disk.0 + disk.2, disk.1),
                cross(lens.0, lens.2),
                cross(lens.1, lens.2),
            ],
            _ => Vec::new(),
        }
    }

    /// Equidistant samples of the phantom: `n` subdivisions of [0,1] in t
    /// (so n+1 samples), grids of `n_per_axis` nodes per image axis for
    /// d >= 2. `n_per_axis` is ignored for interval-valued phantoms.
    pub fn sample(&self, n: usize, n_per_axis: usize) -> Result<SampledSVF> {
        let mut samples = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = i as f64 / n as f64;
            if self.dim == 1 {
                samples.push(SampleSet::Intervals(self.interval_union(t)?));
            } else {
                samples.push(SampleSet::Grid(GridSet::from_fn(
                    self.dim,
                    n_per_axis,
                    |x| self.slice_value(t, x),
                )));
            }
        }
        SampledSVF::new(samples)
    }

    /// Dense points on the graph boundary in ambient coordinates.
    ///
    /// `res` controls the density: points per closed curve for line
    /// boundaries, `res^2` points per surface sheet, `res^3` for d = 3.
    pub fn boundary_samples(&self, res: usize) -> PointCloud {
        let mut cloud = PointCloud::new(self.ambient_dim());
        let push = |cloud: &mut PointCloud, p: &[f64]| {
            cloud.push(p, PointTag::SampleBoundary);
        };
        match &self.kind {
            Kind::Disk1 { ct, cy, r } => circle_points(&mut cloud, *ct, *cy, *r, res),
            Kind::TwoDisks1 { a, b } => {
                circle_points(&mut cloud, a.0, a.1, a.2, res);
                circle_points(&mut cloud, b.0, b.1, b.2, res);
            }
            Kind::HoleDisk1 { ct, cy, r } => {
                circle_points(&mut cloud, *ct, *cy, *r, res);
                frame_points(&mut cloud, res);
            }
            Kind::HoleLens1 { t0, t1, cy, amp } => {
                lens_points(&mut cloud, *t0, *t1, *cy, *amp, res);
                frame_points(&mut cloud, res);
            }
            Kind::DoubleHole1 { disk, lens } => {
                circle_points(&mut cloud, disk.0, disk.1, disk.2, res);
                lens_points(&mut cloud, lens.0, lens.1, lens.2, lens.3, res);
                frame_points(&mut cloud, res);
            }
            Kind::Bands1 => {
                for i in 0..=res {
                    let t = i as f64 / res as f64;
                    let (u, v) = band_edges(t);
                    push(&mut cloud, &[t, u]);
                    push(&mut cloud, &[t, v]);
                }
                frame_points(&mut cloud, res);
            }
            Kind::Ball { c, r } => match self.dim {
                2 => fibonacci_sphere(&mut cloud, c, *r, res * res),
                3 => hypersphere_points(&mut cloud, c, *r, res),
                _ => unreachable!(),
            },
            Kind::Ellipsoid { c, semi } => {
                for i in 0..=res {
                    let phi = PI * i as f64 / res as f64;
                    for j in 0..res.max(1) {
                        let th = 2.0 * PI * j as f64 / res as f64;
                        push(
                            &mut cloud,
                            &[
                                c[0] + semi[0] * phi.cos(),
                                c[1] + semi[1] * phi.sin() * th.cos(),
                                c[2] + semi[2] * phi.sin() * th.sin(),
                            ],
                        );
                    }
                }
            }
            Kind::Torus { major, minor } => {
                for i in 0..res {
                    let th = 2.0 * PI * i as f64 / res as f64;
                    let rho = major + minor * th.cos();
                    let t = 0.5 + minor * th.sin();
                    for j in 0..res {
                        let ph = 2.0 * PI * j as f64 / res as f64;
                        push(&mut cloud, &[t, 0.5 + rho * ph.cos(), 0.5 + rho * ph.sin()]);
                    }
                }
            }
            Kind::TwoBalls { c1, c2, r } => {
                let mut all = PointCloud::new(self.ambient_dim());
                fibonacci_sphere(&mut all, c1, *r, res * res);
                let keep_b = |p: &[f64]| {
                    let dx: Vec<f64> = p.iter().zip(c2).map(|(a, b)| a - b).collect();
                    hypot_n(&dx) >= *r - 1e-12
                };
                for p in all.iter().filter(|p| keep_b(p)) {
                    push(&mut cloud, p);
                }
                let mut all = PointCloud::new(self.ambient_dim());
                fibonacci_sphere(&mut all, c2, *r, res * res);
                let keep_a = |p: &[f64]| {
                    let dx: Vec<f64> = p.iter().zip(c1).map(|(a, b)| a - b).collect();
                    hypot_n(&dx) >= *r - 1e-12
                };
                for p in all.iter().filter(|p| keep_a(p)) {
                    push(&mut cloud, p);
                }
            }
        }
        cloud
    }

    /// Dense points on the boundary of the image at `t`, in image
    /// coordinates. Empty cloud when the image is empty or has no
    /// boundary sampler for this dimension.
    pub fn slice_boundary_samples(&self, t: f64, res: usize) -> PointCloud {
        let mut cloud = PointCloud::new(self.dim);
        if self.dim == 1 {
            if let Ok(u) = self.interval_union(t) {
                for &(lo, hi) in u.intervals() {
                    cloud.push(&[lo], PointTag::SampleBoundary);
                    cloud.push(&[hi], PointTag::SampleBoundary);
                }
            }
            return cloud;
        }
        match &self.kind {
            Kind::Ball { c, r } => {
                let w2 = r * r - (t - c[0]) * (t - c[0]);
                if w2 > 0.0 {
                    sphere_slice(&mut cloud, &c[1..], w2.sqrt(), res, self.dim);
                }
            }
            Kind::Ellipsoid { c, semi } => {
                let w2 = 1.0 - ((t - c[0]) / semi[0]).powi(2);
                if w2 > 0.0 {
                    let w = w2.sqrt();
                    for j in 0..res {
                        let th = 2.0 * PI * j as f64 / res as f64;
                        cloud.push(
                            &[c[1] + w * semi[1] * th.cos(), c[2] + w * semi[2] * th.sin()],
                            PointTag::SampleBoundary,
                        );
                    }
                }
            }
            Kind::Torus { major, minor } => {
                let w2 = minor * minor - (t - 0.5) * (t - 0.5);
                if w2 > 0.0 {
                    let w = w2.sqrt();
                    for &rho in &[major - w, major + w] {
                        for j in 0..res {
                            let th = 2.0 * PI * j as f64 / res as f64;
                            cloud.push(
                                &[0.5 + rho * th.cos(), 0.5 + rho * th.sin()],
                                PointTag::SampleBoundary,
                            );
                        }
                    }
                }
            }
            Kind::TwoBalls { c1, c2, r } => {
                for (ca, cb) in [(c1, c2), (c2, c1)] {
                    let w2 = r * r - (t - ca[0]) * (t - ca[0]);
                    if w2 <= 0.0 {
                        continue;
                    }
                    let mut ring = PointCloud::new(self.dim);
                    sphere_slice(&mut ring, &ca[1..], w2.sqrt(), res, self.dim);
                    let wb2 = r * r - (t - cb[0]) * (t - cb[0]);
                    for p in ring.iter() {
                        let dx: Vec<f64> = p.iter().zip(&cb[1..]).map(|(a, b)| a - b).collect();
                        if wb2 <= 0.0 || hypot_n(&dx) >= wb2.sqrt() - 1e-12 {
                            cloud.push(p, PointTag::SampleBoundary);
                        }
                    }
                }
            }
            _ => {}
        }
        cloud
    }
}

fn disk_interval(t: f64, ct: f64, cy: f64, r: f64) -> IntervalUnion {
    let w2 = r * r - (t - ct) * (t - ct);
    if w2 > 0.0 {
        let w = w2.sqrt();
        IntervalUnion::single(cy - w, cy + w)
    } else if w2 == 0.0 {
        IntervalUnion::single(cy, cy)
    } else {
        IntervalUnion::empty()
    }
}

/// Scalar field of the slab-minus-lens phantom, positive inside.
fn lens_value(t: f64, y: f64, t0: f64, t1: f64, cy: f64, amp: f64) -> f64 {
    let g = amp * (t - t0) * (t - t1);
    if g >= 0.0 {
        // Lens closed at this abscissa: distance to the nearer crossing.
        (t - t0).abs().min((t - t1).abs()).max(1e-12)
    } else {
        let (u, v) = (cy + g, cy - g);
        (u - y).max(y - v)
    }
}

/// The open gap carved by the lens, as an interval union (possibly empty).
fn lens_interval(t: f64, t0: f64, t1: f64, cy: f64, amp: f64) -> IntervalUnion {
    let g = amp * (t - t0) * (t - t1);
    if g < 0.0 {
        IntervalUnion::single(cy + g, cy - g)
    } else {
        IntervalUnion::empty()
    }
}

fn band_edges(t: f64) -> (f64, f64) {
    (0.3 + 0.1 * (2.2 * t).sin(), 0.7 + 0.1 * (1.7 * t).cos())
}

fn circle_points(cloud: &mut PointCloud, ct: f64, cy: f64, r: f64, res: usize) {
    for i in 0..res {
        let th = 2.0 * PI * i as f64 / res as f64;
        cloud.push(&[ct + r * th.cos(), cy + r * th.sin()], PointTag::SampleBoundary);
    }
}

fn lens_points(cloud: &mut PointCloud, t0: f64, t1: f64, cy: f64, amp: f64, res: usize) {
    for i in 0..=res {
        let t = t0 + (t1 - t0) * i as f64 / res as f64;
        let g = amp * (t - t0) * (t - t1);
        cloud.push(&[t, cy + g], PointTag::SampleBoundary);
        cloud.push(&[t, cy - g], PointTag::SampleBoundary);
    }
}

fn frame_points(cloud: &mut PointCloud, res: usize) {
    for i in 0..=res {
        let s = i as f64 / res as f64;
        cloud.push(&[s, 0.0], PointTag::SampleBoundary);
        cloud.push(&[s, 1.0], PointTag::SampleBoundary);
        cloud.push(&[0.0, s], PointTag::SampleBoundary);
        cloud.push(&[1.0, s], PointTag::SampleBoundary);
    }
}

/// Deterministic spiral covering of a 2-sphere in ambient coordinates.
fn fibonacci_sphere(cloud: &mut PointCloud, c: &[f64], r: f64, n: usize) {
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    for i in 0..n {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let rho = (1.0 - z * z).sqrt();
        let th = golden * i as f64;
        cloud.push(
            &[c[0] + r * z, c[1] + r * rho * th.cos(), c[2] + r * rho * th.sin()],
            PointTag::SampleBoundary,
        );
    }
}

/// Angle-lattice covering of a 3-sphere in ambient 4-space.
fn hypersphere_points(cloud: &mut PointCloud, c: &[f64], r: f64, res: usize) {
    for i in 0..=res {
        let psi = PI * i as f64 / res as f64;
        for j in 0..=res {
            let th = PI * j as f64 / res as f64;
            for k in 0..res {
                let ph = 2.0 * PI * k as f64 / res as f64;
                cloud.push(
                    &[
                        c[0] + r * psi.cos(),
                        c[1] + r * psi.sin() * th.cos(),
                        c[2] + r * psi.sin() * th.sin() * ph.cos(),
                        c[3] + r * psi.sin() * th.sin() * ph.sin(),
                    ],
                    PointTag::SampleBoundary,
                );
            }
        }
    }
}

/// Points on a (dim-1)-sphere inside a slice plane, image coordinates.
fn sphere_slice(cloud: &mut PointCloud, c: &[f64], r: f64, res: usize, dim: usize) {
    match dim {
        2 => {
            for j in 0..res {
                let th = 2.0 * PI * j as f64 / res as f64;
                cloud.push(&[c[0] + r * th.cos(), c[1] + r * th.sin()], PointTag::SampleBoundary);
            }
        }
        3 => {
            let shifted = [0.0, c[0], c[1], c[2]];
            let mut tmp = PointCloud::new(3);
            fibonacci_sphere(&mut tmp, &shifted[1..], r, res * res);
            for p in tmp.iter() {
                cloud.push(p, PointTag::SampleBoundary);
            }
        }
        _ => unreachable!(),
    }
}

/// The catalogue of test shapes, addressable by name.
pub fn zoo() -> Vec<Phantom> {
    vec![
        Phantom {
            name: "disk",
            dim: 1,
            smoothness: Smoothness::Smooth,
            kind: Kind::Disk1 { ct: 0.5, cy: 0.5, r: 0.3 },
        },
        Phantom {
            name: "two-disks",
            dim: 1,
            smoothness: Smoothness::Smooth,
            kind: Kind::TwoDisks1 {
                a: (0.35, 0.30, 0.18),
                b: (0.65, 0.70, 0.18),
            },
        },
        Phantom {
            name: "slab-hole",
            dim: 1,
            smoothness: Smoothness::Smooth,
            kind: Kind::HoleDisk1 { ct: 0.5, cy: 0.5, r: 0.2 },
        },
        Phantom {
            name: "lens-hole",
            dim: 1,
            smoothness: Smoothness::Piecewise,
            kind: Kind::HoleLens1 { t0: 0.3, t1: 0.7, cy: 0.5, amp: 2.0 },
        },
        Phantom {
            name: "double-hole",
            dim: 1,
            smoothness: Smoothness::Piecewise,
            kind: Kind::DoubleHole1 {
                disk: (0.3, 0.35, 0.12),
                lens: (0.55, 0.95, 0.75, 2.0),
            },
        },
        Phantom {
            name: "bands",
            dim: 1,
            smoothness: Smoothness::Smooth,
            kind: Kind::Bands1,
        },
        Phantom {
            name: "ball",
            dim: 2,
            smoothness: Smoothness::Smooth,
            kind: Kind::Ball { c: vec![0.5, 0.5, 0.5], r: 0.3 },
        },
        Phantom {
            name: "ellipsoid",
            dim: 2,
            smoothness: Smoothness::Smooth,
            kind: Kind::Ellipsoid {
                c: vec![0.5, 0.5, 0.5],
                semi: vec![0.32, 0.24, 0.18],
            },
        },
        Phantom {
            name: "torus",
            dim: 2,
            smoothness: Smoothness::Smooth,
            kind: Kind::Torus { major: 0.25, minor: 0.12 },
        },
        Phantom {
            name: "two-balls",
            dim: 2,
            smoothness: Smoothness::Piecewise,
            kind: Kind::TwoBalls {
                c1: vec![0.35, 0.40, 0.5],
                c2: vec![0.65, 0.60, 0.5],
                r: 0.22,
            },
        },
        Phantom {
            name: "dumbbell",
            dim: 2,
            smoothness: Smoothness::Piecewise,
            kind: Kind::TwoBalls {
                c1: vec![0.35, 0.5, 0.5],
                c2: vec![0.65, 0.5, 0.5],
                r: 0.22,
            },
        },
        Phantom {
            name: "ball-3d",
            dim: 3,
            smoothness: Smoothness::Smooth,
            kind: Kind::Ball { c: vec![0.5, 0.5, 0.5, 0.5], r: 0.3 },
        },
    ]
}

pub fn by_name(name: &str) -> Option<Phantom> {
    zoo().into_iter().find(|p| p.name == name)
}

pub fn names() -> Vec<&'static str> {
    zoo().iter().map(|p| p.name).collect()
}

/// Per-abscissa and summary errors of a reconstruction against a phantom.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// (t, Hausdorff distance of the images) per evaluation abscissa.
    pub per_t: Vec<(f64, f64)>,
    pub sup: f64,
    /// Distance from each analytic topology change point to the nearest
    /// recovered one in the (t, y) plane; infinite when none was found.
    pub pct_errors: Vec<f64>,
}

/// Hausdorff distance between interval unions, scoring an emptiness
/// mismatch by the extent of the non-empty operand.
pub fn interval_error(a: &IntervalUnion, b: &IntervalUnion) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) => extent(b),
        (false, true) => extent(a),
        (false, false) => hausdorff_1d(a, b).expect("both operands non-empty"),
    }
}

fn extent(u: &IntervalUnion) -> f64 {
    match (u.min(), u.max()) {
        (Some(lo), Some(hi)) => (hi - lo).max(1e-3),
        _ => 0.0,
    }
}

/// Measures a one dimensional reconstruction against the analytic phantom.
pub fn measure_1d(ph: &Phantom, approx: &SVF1DApproximant, ts: &[f64]) -> Result<ErrorReport> {
    if ph.dim != 1 {
        return Err(Error::DimensionUnsupported(ph.dim));
    }
    let mut per_t = Vec::with_capacity(ts.len());
    let mut sup: f64 = 0.0;
    for &t in ts {
        let got = approx.evaluate(t)?;
        let want = ph.interval_union(t)?;
        let e = interval_error(&got, &want);
        sup = sup.max(e);
        per_t.push((t, e));
    }
    let pct_errors = pct_location_errors(&ph.pcts(), &approx.pcts());
    Ok(ErrorReport { per_t, sup, pct_errors })
}

/// Hausdorff distance between a reconstructed planar slice and the true
/// image F(t), for phantoms whose `slice_value` is an exact in-slice
/// signed distance (ball, torus). Reconstructed boundary points are scored
/// analytically; dense true boundary points are scored by their distance
/// to the reconstructed set, taking the within-row distance where the
/// swept point cloud is sparse along steep boundary runs.
pub fn slice_hausdorff(ph: &Phantom, t: f64, slice: &Stage2Slice) -> f64 {
    let pts = slice.boundary_points(1e-3);
    let mut fwd: f64 = 0.0;
    for p in &pts {
        fwd = fwd.max(-ph.slice_value(t, p).min(0.0));
    }
    let truth = ph.slice_boundary_samples(t, 4096);
    let mut rev: f64 = 0.0;
    for q in truth.iter() {
        let row_sd = slice
            .section
            .evaluate(q[1])
            .map(|row| row.signed_distance(q[0]))
            .unwrap_or(f64::NEG_INFINITY);
        if row_sd >= 0.0 {
            continue;
        }
        let mut d = -row_sd;
        for p in &pts {
            d = d.min((p[0] - q[0]).hypot(p[1] - q[1]));
        }
        rev = rev.max(d);
    }
    fwd.max(rev)
}

/// Hausdorff distance between the true graph boundary and the zero level
/// of an implicit reconstruction, for phantoms with an ambient
/// `signed_distance`. Extracted zero-level vertices are scored against the
/// analytic field (exact for single disks, balls and tori; for unions the
/// bound tightens to exact away from the weld curve); dense analytic
/// boundary points are scored by Newton projection onto the spline's zero
/// level, falling back to the nearest extracted vertex.
pub fn graph_hausdorff(ph: &Phantom, ga: &GraphApproximant, res: usize) -> Result<f64> {
    let probe = vec![0.5; ph.ambient_dim()];
    if ph.signed_distance(&probe).is_none() {
        return Err(Error::InvalidArgument(format!(
            "phantom `{}` has no ambient signed distance to compare against",
            ph.name
        )));
    }
    let verts: Vec<Vec<f64>> = match ga.boundary_mesh(res)? {
        LevelSet::Contours(loops) => loops
            .iter()
            .flatten()
            .map(|p| vec![p[0], p[1]])
            .collect(),
        LevelSet::Mesh(mesh) => mesh.vertices.iter().map(|v| v.to_vec()).collect(),
    };
    if verts.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut fwd: f64 = 0.0;
    for v in &verts {
        fwd = fwd.max(ph.signed_distance(v).unwrap().abs());
    }
    let dense_res = if ph.ambient_dim() == 2 { 2048 } else { 48 };
    let truth = ph.boundary_samples(dense_res);
    let mut rev: f64 = 0.0;
    for q in truth.iter() {
        let d = match project_to_zero(ga.spline(), q, 40) {
            Some(foot) => crate::geom::cloud::dist(q, &foot),
            None => verts
                .iter()
                .map(|v| crate::geom::cloud::dist(q, v))
                .fold(f64::INFINITY, f64::min),
        };
        rev = rev.max(d);
    }
    Ok(fwd.max(rev))
}

/// Distance from each reference topology change point to the nearest
/// recovered one, measured in the (t, y) plane.
pub fn pct_location_errors(reference: &[Pct], found: &[Pct]) -> Vec<f64> {
    reference
        .iter()
        .map(|want| {
            found
                .iter()
                .map(|got| (got.t - want.t).hypot(got.y - want.y))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// True when every membership disagreement between two same-shape rasters
/// sits within one cell of the reference raster's sign boundary.
pub fn grids_agree_within_one_cell(got: &GridSet, want: &GridSet) -> bool {
    if got.dim() != want.dim() || got.n_per_axis() != want.n_per_axis() {
        return false;
    }
    let d = want.dim();
    let n = want.n_per_axis();
    let total = n.pow(d as u32);
    let unflatten = |flat: usize| {
        let mut idx = vec![0usize; d];
        let mut rem = flat;
        for a in (0..d).rev() {
            idx[a] = rem % n;
            rem /= n;
        }
        idx
    };
    'node: for flat in 0..total {
        let idx = unflatten(flat);
        let g = got.value_at(&idx) >= 0.0;
        let w = want.value_at(&idx) >= 0.0;
        if g == w {
            continue;
        }
        // The node is misclassified; accept it only next to a sign change
        // of the reference (a one-cell neighborhood in the sup metric).
        let mut nb = idx.clone();
        for delta in neighbor_offsets(d) {
            let mut ok = true;
            for a in 0..d {
                let v = idx[a] as isize + delta[a];
                if v < 0 || v >= n as isize {
                    ok = false;
                    break;
                }
                nb[a] = v as usize;
            }
            if ok && (want.value_at(&nb) >= 0.0) != w {
                continue 'node;
            }
        }
        return false;
    }
    true
}

fn neighbor_offsets(d: usize) -> Vec<Vec<isize>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for base in &out {
            for step in [-1isize, 0, 1] {
                let mut v = base.clone();
                v.push(step);
                next.push(v);
            }
        }
        out = next;
    }
    out.retain(|v| v.iter().any(|&s| s != 0));
    out
}

/// Largest gap between a reference boundary cloud and a reconstruction
/// cloud: twice the worst distance from the reference to the cloud.
pub fn coverage_fill_distance(cloud: &PointCloud, reference: &PointCloud) -> Result<f64> {
    crate::geom::cloud::fill_distance(cloud, reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_slices_match_closed_form() {
        let ph = by_name("disk").unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let w2: f64 = 0.09 - (t - 0.5) * (t - 0.5);
            let u = ph.interval_union(t).unwrap();
            if w2 >= 0.0 {
                let iv = u.intervals();
                assert_eq!(iv.len(), 1);
                assert!((iv[0].0 - (0.5 - w2.sqrt())).abs() < 1e-15);
                assert!((iv[0].1 - (0.5 + w2.sqrt())).abs() < 1e-15);
            } else {
                assert!(u.is_empty());
            }
        }
    }

    #[test]
    fn membership_agrees_with_intervals_for_interval_phantoms() {
        for ph in zoo().into_iter().filter(|p| p.dim == 1) {
            for i in 0..=40 {
                let t = i as f64 / 40.0;
                let u = ph.interval_union(t).unwrap();
                for j in 0..=40 {
                    let y = j as f64 / 40.0;
                    let v = ph.slice_value(t, &[y]);
                    if v.abs() > 1e-9 {
                        assert_eq!(
                            u.contains(y),
                            v > 0.0,
                            "phantom {} at t={t} y={y}",
                            ph.name
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_samples_sit_on_the_exact_boundary() {
        for name in ["disk", "ball", "torus", "two-balls", "dumbbell", "ball-3d"] {
            let ph = by_name(name).unwrap();
            let cloud = ph.boundary_samples(24);
            assert!(!cloud.is_empty());
            let mut worst: f64 = 0.0;
            for p in cloud.iter() {
                let sd = ph.signed_distance(p).unwrap();
                worst = worst.max(sd.abs());
            }
            assert!(worst < 1e-12, "{name}: worst |sd| = {worst:.2e}");
        }
    }

    #[test]
    fn slice_boundaries_lie_on_the_zero_level() {
        for name in ["ball", "ellipsoid", "torus", "two-balls"] {
            let ph = by_name(name).unwrap();
            for &t in &[0.42, 0.5, 0.58] {
                let pts = ph.slice_boundary_samples(t, 64);
                assert!(!pts.is_empty(), "{name} slice at {t} empty");
                for p in pts.iter() {
                    let v = ph.slice_value(t, p);
                    assert!(v.abs() < 1e-10, "{name} t={t}: |value| = {:.2e}", v.abs());
                }
            }
        }
    }

    #[test]
    fn sampling_produces_expected_shapes() {
        let ph = by_name("ball").unwrap();
        let svf = ph.sample(16, 33).unwrap();
        assert_eq!(svf.len(), 17);
        assert_eq!(svf.dim(), 2);
        let mid = svf.sample(8).as_grid().unwrap();
        let iv = mid.slice_to_intervals(1, 0.5).unwrap();
        let iv = iv.intervals();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 - 0.2).abs() < 1e-3);
        assert!((iv[0].1 - 0.8).abs() < 1e-3);

        let ph = by_name("torus").unwrap();
        let svf = ph.sample(16, 33).unwrap();
        let mid = svf.sample(8).as_grid().unwrap();
        let iv = mid.slice_to_intervals(1, 0.5).unwrap();
        assert_eq!(iv.intervals().len(), 2, "annulus slice has two bars");
    }

    #[test]
    fn pct_lists_match_slice_emptiness_transitions() {
        let ph = by_name("disk").unwrap();
        let pcts = ph.pcts();
        assert_eq!(pcts.len(), 2);
        assert!(ph.interval_union(pcts[0].t - 0.01).unwrap().is_empty());
        assert!(!ph.interval_union(pcts[0].t + 0.01).unwrap().is_empty());
        assert!(!ph.interval_union(pcts[1].t - 0.01).unwrap().is_empty());
        assert!(ph.interval_union(pcts[1].t + 0.01).unwrap().is_empty());
    }

    #[test]
    fn double_hole_has_mixed_pct_kinds() {
        let ph = by_name("double-hole").unwrap();
        let pcts = ph.pcts();
        let folds = pcts.iter().filter(|p| p.kind == PctKind::Fold).count();
        let crossings = pcts.iter().filter(|p| p.kind == PctKind::Crossing).count();
        assert_eq!((folds, crossings), (2, 2));
    }

    #[test]
    fn interval_error_scores_emptiness_mismatch() {
        let a = IntervalUnion::single(0.4, 0.6);
        let b = IntervalUnion::empty();
        assert!((interval_error(&a, &b) - 0.2).abs() < 1e-15);
        assert_eq!(interval_error(&b, &b), 0.0);
        let c = IntervalUnion::single(0.45, 0.65);
        assert!((interval_error(&a, &c) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn measured_error_of_exact_reconstruction_is_tiny() {
        let ph = by_name("bands").unwrap();
        let svf = ph.sample(32, 0).unwrap();
        let approx = crate::svf1d::build_approximant(&svf, 3, 3).unwrap();
        let ts: Vec<f64> = (0..=128).map(|i| i as f64 / 128.0).collect();
        let report = measure_1d(&ph, &approx, &ts).unwrap();
        assert!(report.sup < 2e-6, "sup = {:.2e}", report.sup);
        assert!(report.pct_errors.is_empty());
    }

    #[test]
    fn raster_agreement_tolerates_one_cell_and_flags_two() {
        let want = GridSet::from_fn(2, 17, |x| 0.5 - x[0]);
        let one_off = GridSet::from_fn(2, 17, |x| 0.5 + 1.0 / 16.0 - x[0]);
        let two_off = GridSet::from_fn(2, 17, |x| 0.5 + 2.2 / 16.0 - x[0]);
        assert!(grids_agree_within_one_cell(&want, &want));
        assert!(grids_agree_within_one_cell(&one_off, &want));
        assert!(!grids_agree_within_one_cell(&two_off, &want));
    }

    #[test]
    fn dumbbell_neck_and_caps() {
        let ph = by_name("dumbbell").unwrap();
        // Caps: slices empty outside [0.13, 0.87].
        assert!(ph.slice_value(0.12, &[0.5, 0.5]) < 0.0);
        assert!(ph.slice_value(0.14, &[0.5, 0.5]) > 0.0);
        assert!(ph.slice_value(0.86, &[0.5, 0.5]) > 0.0);
        assert!(ph.slice_value(0.88, &[0.5, 0.5]) < 0.0);
        // Neck: single disk of radius sqrt(r^2 - 0.15^2) at t = 0.5.
        let neck = (0.22f64 * 0.22 - 0.15 * 0.15).sqrt();
        assert!(ph.slice_value(0.5, &[0.5 + neck - 1e-6, 0.5]) > 0.0);
        assert!(ph.slice_value(0.5, &[0.5 + neck + 1e-6, 0.5]) < 0.0);
    }

    #[test]
    fn zoo_names_are_unique_and_resolvable() {
        let names = names();
        for n in &names {
            assert!(by_name(n).is_some());
        }
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
    }
}
