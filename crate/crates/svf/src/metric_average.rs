//! Metric averages of compact sets and the piecewise set-valued graph
//! built from them.
//!
//! The average of A and B with weight w is the set of blends
//! (1-w)a + w b over all pairs (a, b) in which one point is a nearest
//! point of the other. It interpolates between A (w = 0) and B (w = 1)
//! and satisfies the metric property
//! d_H(A avg_w B, A) <= d_H(A, B), which is what the graph construction
//! leans on.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::cloud::{HashGrid, PointCloud, PointTag};
use crate::geom::grid::GridSet;
use crate::geom::interval::IntervalUnion;

/// The interval of `u` closest to `x` (assumes `u` non-empty).
fn nearest_interval(u: &IntervalUnion, x: f64) -> (f64, f64) {
    let mut best = (f64::NAN, f64::NAN);
    let mut best_d = f64::INFINITY;
    for &(lo, hi) in u.intervals() {
        let d = (x - x.clamp(lo, hi)).abs();
        if d < best_d {
            best_d = d;
            best = (lo, hi);
        }
    }
    best
}

/// Cuts where the nearest-point map onto `target` changes its affine
/// branch: interval endpoints and gap midpoints.
fn nearest_map_breaks(target: &IntervalUnion) -> Vec<f64> {
    let mut cuts = target.endpoints();
    for w in target.intervals().windows(2) {
        cuts.push(0.5 * (w[0].1 + w[1].0));
    }
    cuts.sort_by(f64::total_cmp);
    cuts
}

/// Exact metric average of two interval unions.
///
/// On each sub-segment of one operand where the nearest-point map onto
/// the other is affine, the blend is affine and monotone, so its image is
/// the interval spanned by the endpoint images. The result is the union
/// of these images from both directions; no discretization is involved.
pub fn metric_average_1d(a: &IntervalUnion, b: &IntervalUnion, w: f64) -> Result<IntervalUnion> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidArgument(format!("weight {w} outside [0,1]")));
    }
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut one_direction = |src: &IntervalUnion, dst: &IntervalUnion, w_src: f64| {
        let cuts = nearest_map_breaks(dst);
        for &(lo, hi) in src.intervals() {
            let mut stops = vec![lo, hi];
            for &c in &cuts {
                if c > lo && c < hi {
                    stops.push(c);
                }
            }
            stops.sort_by(f64::total_cmp);
            for pair in stops.windows(2) {
                // The nearest-point map jumps at gap midpoints (both
                // branches belong to the pair set there), so the affine
                // branch is chosen by the piece midpoint and applied to
                // both ends; consecutive pieces cover both jump values.
                let mid = 0.5 * (pair[0] + pair[1]);
                let branch = nearest_interval(dst, mid);
                let img =
                    |x: f64| w_src * x + (1.0 - w_src) * x.clamp(branch.0, branch.1);
                let (p, q) = (img(pair[0]), img(pair[1]));
                out.push((p.min(q), p.max(q)));
            }
        }
    };
    // Pairs (a, nearest b) blend to (1-w)a + w b, and symmetrically.
    one_direction(a, b, 1.0 - w);
    one_direction(b, a, w);
    Ok(IntervalUnion::new(out))
}

/// In-set lattice nodes of a grid set, resampled at `res` nodes per axis.
fn inside_nodes(g: &GridSet, res: usize) -> PointCloud {
    let mut cloud = PointCloud::new(2);
    let step = 1.0 / (res - 1) as f64;
    for i in 0..res {
        for j in 0..res {
            let p = [i as f64 * step, j as f64 * step];
            if g.interpolate(&p) >= 0.0 {
                cloud.push(&p, PointTag::SampleBoundary);
            }
        }
    }
    cloud
}

/// Discretized metric average of two planar grid sets.
///
/// Dense in-set nodes are extracted from both operands, nearest-point
/// pairs are collected in both directions, the blends are rasterized at
/// `res` nodes per axis, and pinholes are removed by a one-cell
/// morphological closing. `res = 0` takes the finer operand resolution.
pub fn metric_average_grid(a: &GridSet, b: &GridSet, w: f64, res: usize) -> Result<GridSet> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::DimensionUnsupported(a.dim().max(b.dim())));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidArgument(format!("weight {w} outside [0,1]")));
    }
    let res = if res == 0 {
        a.n_per_axis().max(b.n_per_axis())
    } else {
        res
    };
    let pa = inside_nodes(a, res);
    let pb = inside_nodes(b, res);
    if pa.is_empty() || pb.is_empty() {
        return Err(Error::EmptySet);
    }
    let cell = 1.0 / (res - 1) as f64;
    let ia = HashGrid::build(&pa, 2.0 * cell);
    let ib = HashGrid::build(&pb, 2.0 * cell);

    let mut occupied = vec![false; res * res];
    let mut mark = |p: [f64; 2]| {
        let i = (p[0] / cell).round().clamp(0.0, (res - 1) as f64) as usize;
        let j = (p[1] / cell).round().clamp(0.0, (res - 1) as f64) as usize;
        occupied[i * res + j] = true;
    };
    for p in pa.iter() {
        let (bi, _) = ib.nearest(p).expect("pb non-empty");
        let q = pb.point(bi);
        mark([(1.0 - w) * p[0] + w * q[0], (1.0 - w) * p[1] + w * q[1]]);
    }
    for q in pb.iter() {
        let (ai, _) = ia.nearest(q).expect("pa non-empty");
        let p = pa.point(ai);
        mark([(1.0 - w) * p[0] + w * q[0], (1.0 - w) * p[1] + w * q[1]]);
    }

    let closed = morphological_close(&occupied, res);
    let values: Vec<f64> = closed.iter().map(|&o| if o { 1.0 } else { -1.0 }).collect();
    GridSet::new(2, res, values)
}

/// Dilation followed by erosion with a one-cell box element.
fn morphological_close(occ: &[bool], n: usize) -> Vec<bool> {
    let box_pass = |src: &[bool], grow: bool| -> Vec<bool> {
        let mut dst = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = !grow;
                'win: for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        // Outside the lattice counts as empty.
                        let v = if ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                            false
                        } else {
                            src[ii as usize * n + jj as usize]
                        };
                        if grow && v {
                            acc = true;
                            break 'win;
                        }
                        if !grow && !v {
                            acc = false;
                            break 'win;
                        }
                    }
                }
                dst[i * n + j] = acc;
            }
        }
        dst
    };
    // Erosion treats the outside as full so thin sets touching the
    // boundary are not eaten away.
    let dilated = box_pass(occ, true);
    let mut dst = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut all = true;
            'win: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                        continue;
                    }
                    if !dilated[ii as usize * n + jj as usize] {
                        all = false;
                        break 'win;
                    }
                }
            }
            dst[i * n + j] = all;
        }
    }
    dst
}

/// Hausdorff distance between two grid sets, via their in-set nodes.
pub fn grid_hausdorff(a: &GridSet, b: &GridSet, res: usize) -> Result<f64> {
    let pa = inside_nodes(a, res);
    let pb = inside_nodes(b, res);
    crate::geom::cloud::hausdorff_points(&pa, &pb)
}

/// Piecewise set-valued function stored on a uniform tau-grid; between
/// stored slices the value is the metric average of the bracketing ones.
#[derive(Debug, Clone)]
pub struct MetricAverageGraph {
    taus: Vec<f64>,
    slices: Vec<Option<GridSet>>,
    res: usize,
    empty_slices: usize,
}

/// Spacing of the stored slices for sample spacing `h` and target order
/// `s`: the literal h^s, floored at 1/1024 to keep storage finite.
pub fn tau_spacing(h: f64, s: usize) -> f64 {
    h.powi(s as i32).max(1.0 / 1024.0)
}

/// Builds the stored-slice representation by evaluating `eval` on the
/// tau-grid. An evaluation reporting an empty image is tolerated and
/// recorded; the affected segments fall back to their other endpoint.
pub fn build_graph_by_metric_average(
    eval: impl Fn(f64) -> Result<GridSet> + Sync,
    h: f64,
    s: usize,
    res: usize,
) -> Result<MetricAverageGraph> {
    let tau = tau_spacing(h, s);
    let count = (1.0 / tau).ceil() as usize + 1;
    let taus: Vec<f64> = (0..count)
        .map(|j| (j as f64 * tau).min(1.0))
        .collect();
    let slices: Result<Vec<Option<GridSet>>> = taus
        .par_iter()
        .map(|&t| match eval(t) {
            Ok(g) => Ok(if g.is_node_empty() { None } else { Some(g) }),
            Err(Error::EmptySet) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let slices = slices?;
    let empty_slices = slices.iter().filter(|s| s.is_none()).count();
    Ok(MetricAverageGraph { taus, slices, res, empty_slices })
}

impl MetricAverageGraph {
    pub fn tau_grid(&self) -> &[f64] {
        &self.taus
    }

    /// Number of tau-grid slices with empty images; non-zero values mark
    /// segments evaluated by endpoint fallback instead of averaging.
    pub fn empty_slice_count(&self) -> usize {
        self.empty_slices
    }

    pub fn evaluate(&self, t: f64) -> Result<GridSet> {
        if !(-1e-12..=1.0 + 1e-12).contains(&t) {
            return Err(Error::OutOfDomain(t));
        }
        let t = t.clamp(0.0, 1.0);
        let j = self
            .taus
            .partition_point(|&tau| tau <= t)
            .saturating_sub(1)
            .min(self.taus.len() - 2);
        let (t0, t1) = (self.taus[j], self.taus[j + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        match (&self.slices[j], &self.slices[j + 1]) {
            (Some(a), Some(b)) => {
                if w == 0.0 {
                    Ok(a.clone())
                } else if w == 1.0 {
                    Ok(b.clone())
                } else {
                    metric_average_grid(a, b, w, self.res)
                }
            }
            (Some(a), None) => Ok(a.clone()),
            (None, Some(b)) => Ok(b.clone()),
            (None, None) => Ok(GridSet::from_fn(2, self.res, |_| -1.0)),
        }
    }
}
