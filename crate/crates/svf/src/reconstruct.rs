//! Top-level reconstruction pipelines: two-stage evaluation for planar
//! images, boundary point collection along samples and section lines, the
//! implicit graph build in any dimension, inclusion queries and boundary
//! normals.

use rayon::prelude::*;

use crate::distance::{build_signed_grid, MLSConfig, SignedDistanceGrid};
use crate::error::{Error, Result};
use crate::geom::cloud::{PointCloud, PointTag};
use crate::geom::grid::GridSet;
use crate::geom::interval::IntervalUnion;
use crate::geom::sampled::{SampleSet, SampledSVF};
use crate::metric_average::{build_graph_by_metric_average, MetricAverageGraph};
use crate::quasi::marching::{zero_level_extract, LevelSet};
use crate::quasi::tensor::TensorSpline;
use crate::svf1d::{build_approximant, SVF1DApproximant};

/// Orders and degrees of the reconstruction pipeline.
#[derive(Debug, Clone)]
pub struct ReconstructConfig {
    /// Smoothness order of the distance estimation (patch degree m-1).
    pub m: usize,
    /// Sample count driving the fold model (2k points, degree 2k-1).
    pub k: usize,
    /// Degree of both the section splines and the implicit spline.
    pub p_spline: usize,
    /// Target convergence order; controls stored-slice spacing in the
    /// metric-average route.
    pub s_target: usize,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        ReconstructConfig { m: 3, k: 3, p_spline: 3, s_target: 4 }
    }
}

/// Section-level bookkeeping collected during builds.
#[derive(Debug, Clone, Default)]
pub struct BuildDiagnostics {
    pub sections_total: usize,
    /// Sections whose boundary curves all failed the separation check.
    pub sections_skipped: usize,
    /// Sections that failed to assemble at all (pairing breakdowns).
    pub sections_failed: usize,
    pub curves_reliable: usize,
    pub curves_unreliable: usize,
}

impl BuildDiagnostics {
    fn absorb(&mut self, a: &SVF1DApproximant) {
        self.curves_reliable += a.curves().iter().filter(|c| c.reliable).count();
        self.curves_unreliable += a.curves().iter().filter(|c| !c.reliable).count();
    }
}

/// Restriction of every sample to the line with image coordinates
/// x_2, ..., x_d pinned at `fixed` (values, not indices), yielding a one
/// dimensional set-valued function of t.
fn section_svf(svf: &SampledSVF, fixed: &[f64]) -> Result<SampledSVF> {
    let dim = svf.dim();
    if fixed.len() + 1 != dim {
        return Err(Error::DimensionMismatch(format!(
            "{} fixed coordinates for image dimension {}",
            fixed.len(),
            dim
        )));
    }
    let mut samples = Vec::with_capacity(svf.len());
    for i in 0..svf.len() {
        let u = match svf.sample(i) {
            SampleSet::Intervals(u) => u.clone(),
            SampleSet::Grid(g) => {
                let mut g = g.clone();
                // Slice the highest axis first so lower indices keep their
                // meaning as the dimension drops.
                for a in (1..dim).rev() {
                    if g.dim() == 2 {
                        let u = g.slice_to_intervals(a, fixed[a - 1])?;
                        samples.push(SampleSet::Intervals(u));
                        break;
                    }
                    g = g.slice(a, fixed[a - 1])?;
                }
                continue;
            }
        };
        samples.push(SampleSet::Intervals(u));
    }
    SampledSVF::new(samples)
}

/// One dimensional approximant of t -> F(t) restricted to the lattice
/// line x_2 = j h (planar images only).
pub fn stage1_line_sections(
    svf: &SampledSVF,
    j: usize,
    config: &ReconstructConfig,
) -> Result<SVF1DApproximant> {
    if svf.dim() != 2 {
        return Err(Error::DimensionUnsupported(svf.dim()));
    }
    let section = section_svf(svf, &[j as f64 * svf.h()])?;
    let approx = build_approximant(&section, config.k, config.p_spline)?;
    if !approx.curves().is_empty() && approx.curves().iter().all(|c| !c.reliable) {
        return Err(Error::AllCurvesUnreliable);
    }
    Ok(approx)
}

enum SectionState {
    Built(SVF1DApproximant),
    Skipped,
}

/// All constant-x_2 section approximants of a planar sampled function,
/// built once and reused across evaluations.
pub struct TwoStage {
    sections: Vec<SectionState>,
    raster_res: usize,
    config: ReconstructConfig,
    diagnostics: BuildDiagnostics,
}

pub fn build_two_stage(svf: &SampledSVF, config: &ReconstructConfig) -> Result<TwoStage> {
    if svf.dim() != 2 {
        return Err(Error::DimensionUnsupported(svf.dim()));
    }
    let n = svf.len();
    let built: Vec<Result<SectionState>> = (0..n)
        .into_par_iter()
        .map(|j| match stage1_line_sections(svf, j, config) {
            Ok(a) => Ok(SectionState::Built(a)),
            Err(Error::AllCurvesUnreliable) => Ok(SectionState::Skipped),
            Err(e) => Err(e),
        })
        .collect();
    let mut sections = Vec::with_capacity(n);
    let mut diagnostics = BuildDiagnostics {
        sections_total: n,
        ..Default::default()
    };
    for s in built {
        let s = s?;
        match &s {
            SectionState::Built(a) => diagnostics.absorb(a),
            SectionState::Skipped => diagnostics.sections_skipped += 1,
        }
        sections.push(s);
    }
    let raster_res = match svf.sample(0) {
        SampleSet::Grid(g) => g.n_per_axis(),
        SampleSet::Intervals(_) => n,
    };
    Ok(TwoStage {
        sections,
        raster_res,
        config: config.clone(),
        diagnostics,
    })
}

/// Result of a second-stage evaluation: the boundary description of the
/// image at one abscissa, and its raster.
pub struct Stage2Slice {
    /// One dimensional approximant over x_2 whose images are intervals in
    /// x_1; its boundary curves are the boundary of the evaluated set.
    pub section: SVF1DApproximant,
    pub raster: GridSet,
}

impl Stage2Slice {
    /// Boundary points in image coordinates (x_1, x_2).
    pub fn boundary_points(&self, spacing: f64) -> Vec<[f64; 2]> {
        self.section
            .boundary_points(spacing)
            .into_iter()
            .map(|(x2, x1)| [x1, x2])
            .collect()
    }
}

impl TwoStage {
    pub fn diagnostics(&self) -> &BuildDiagnostics {
        &self.diagnostics
    }

    pub fn section(&self, j: usize) -> Option<&SVF1DApproximant> {
        match &self.sections[j] {
            SectionState::Built(a) => Some(a),
            SectionState::Skipped => None,
        }
    }

    /// Evaluates the planar image at `t` by running the one dimensional
    /// procedure over the pseudo-samples read off every section.
    pub fn evaluate(&self, t: f64) -> Result<Stage2Slice> {
        let pseudo: Result<Vec<IntervalUnion>> = self
            .sections
            .iter()
            .map(|s| match s {
                SectionState::Built(a) => a.evaluate(t),
                SectionState::Skipped => Ok(IntervalUnion::empty()),
            })
            .collect();
        let samples: Vec<SampleSet> = pseudo?.into_iter().map(SampleSet::Intervals).collect();
        let cross = SampledSVF::new(samples)?;
        let section = build_approximant(&cross, self.config.k, self.config.p_spline)?;
        let raster = rasterize_section(&section, self.raster_res)?;
        Ok(Stage2Slice { section, raster })
    }
}

/// Rasterizes a second-stage approximant (abscissa x_2, intervals in x_1)
/// onto an n-by-n grid of per-line signed distances.
fn rasterize_section(section: &SVF1DApproximant, res: usize) -> Result<GridSet> {
    let step = 1.0 / (res - 1) as f64;
    let mut rows = Vec::with_capacity(res);
    for j in 0..res {
        rows.push(section.evaluate(j as f64 * step)?);
    }
    let mut values = vec![0.0f64; res * res];
    for i in 0..res {
        let x1 = i as f64 * step;
        for (j, row) in rows.iter().enumerate() {
            // Genuinely empty rows get a finite outside value so that
            // downstream interpolation stays well defined.
            values[i * res + j] = row.signed_distance(x1).max(-1.0);
        }
    }
    GridSet::new(2, res, values)
}

/// One-shot second-stage evaluation; builds all sections first. Prefer
/// [`build_two_stage`] + [`TwoStage::evaluate`] for repeated queries.
pub fn stage2_evaluate(
    svf: &SampledSVF,
    t: f64,
    config: &ReconstructConfig,
) -> Result<Stage2Slice> {
    build_two_stage(svf, config)?.evaluate(t)
}

/// Wires the two-stage evaluator into the stored-slice metric-average
/// graph construction.
pub fn metric_average_graph(
    svf: &SampledSVF,
    config: &ReconstructConfig,
    res: usize,
) -> Result<MetricAverageGraph> {
    let two = build_two_stage(svf, config)?;
    let res = if res == 0 { two.raster_res } else { res };
    build_graph_by_metric_average(
        |t| two.evaluate(t).map(|s| s.raster),
        svf.h(),
        config.s_target,
        res,
    )
}

/// Root of the interpolated sample field along the segment from `a` to
/// `b` (node coordinates with opposite signs), bisected to the stated
/// root tolerance.
fn edge_root(g: &GridSet, a: &[f64], b: &[f64], va: f64, vb: f64) -> Vec<f64> {
    debug_assert!((va >= 0.0) != (vb >= 0.0));
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let point = |s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(&pa, &pb)| pa + s * (pb - pa)).collect()
    };
    let mut flo = va;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let fm = g.interpolate(&point(mid));
        if fm.abs() < 1e-12 {
            return point(mid);
        }
        if (fm >= 0.0) == (flo >= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    point(0.5 * (lo + hi))
}

/// Boundary points of every sample, found on the sample grids themselves:
/// roots of the interpolated field along grid edges with a sign change,
/// carried at the ambient coordinate t = ih.
pub fn collect_q0(svf: &SampledSVF) -> PointCloud {
    let dim = svf.dim();
    let h = svf.h();
    let mut cloud = PointCloud::new(dim + 1);
    for i in 0..svf.len() {
        let t = i as f64 * h;
        match svf.sample(i) {
            SampleSet::Intervals(u) => {
                for &(lo, hi) in u.intervals() {
                    cloud.push(&[t, lo], PointTag::SampleBoundary);
                    cloud.push(&[t, hi], PointTag::SampleBoundary);
                }
            }
            SampleSet::Grid(g) => {
                for p in grid_boundary_roots(g) {
                    let mut q = Vec::with_capacity(dim + 1);
                    q.push(t);
                    q.extend_from_slice(&p);
                    cloud.push(&q, PointTag::SampleBoundary);
                }
            }
        }
    }
    cloud
}

/// Edge roots of one sample grid, in image coordinates.
fn grid_boundary_roots(g: &GridSet) -> Vec<Vec<f64>> {
    let d = g.dim();
    let n = g.n_per_axis();
    let step = g.spacing();
    let total = n.pow(d as u32);
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    for flat in 0..total {
        let mut rem = flat;
        for a in (0..d).rev() {
            idx[a] = rem % n;
            rem /= n;
        }
        let va = g.value_at(&idx);
        for axis in 0..d {
            if idx[axis] + 1 >= n {
                continue;
            }
            let mut jdx = idx.clone();
            jdx[axis] += 1;
            let vb = g.value_at(&jdx);
            if (va >= 0.0) == (vb >= 0.0) {
                continue;
            }
            let a_pt: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
            let b_pt: Vec<f64> = jdx.iter().map(|&k| k as f64 * step).collect();
            out.push(edge_root(g, &a_pt, &b_pt, va, vb));
        }
    }
    out
}

/// Boundary points along every lattice section line: per line, the one
/// dimensional reconstruction is built and its reliable boundary curves
/// (including the fold caps) are sampled at spacing h, embedded at the
/// line's image coordinates.
pub fn collect_q1(svf: &SampledSVF) -> (PointCloud, BuildDiagnostics) {
    collect_q1_with(svf, &ReconstructConfig::default())
}

/// As [`collect_q1`] with explicit section-build orders.
pub fn collect_q1_with(
    svf: &SampledSVF,
    config: &ReconstructConfig,
) -> (PointCloud, BuildDiagnostics) {
    let dim = svf.dim();
    let h = svf.h();
    let n = svf.len();
    let mut cloud = PointCloud::new(dim + 1);
    let lines: Vec<Vec<f64>> = lattice_lines(dim, n, h);

    let per_line: Vec<(Vec<Vec<f64>>, BuildDiagnostics)> = lines
        .par_iter()
        .map(|fixed| {
            let mut diag = BuildDiagnostics {
                sections_total: 1,
                ..Default::default()
            };
            let mut pts: Vec<Vec<f64>> = Vec::new();
            let section = match section_svf(svf, fixed) {
                Ok(s) => s,
                Err(_) => {
                    diag.sections_failed += 1;
                    return (pts, diag);
                }
            };
            match build_approximant(&section, config.k, config.p_spline) {
                Ok(a) => {
                    diag.absorb(&a);
                    if !a.curves().is_empty() && a.curves().iter().all(|c| !c.reliable) {
                        diag.sections_skipped += 1;
                    }
                    for (t, y) in a.boundary_points(h) {
                        let mut p = Vec::with_capacity(dim + 1);
                        p.push(t);
                        p.push(y);
                        p.extend_from_slice(fixed);
                        pts.push(p);
                    }
                }
                Err(_) => diag.sections_failed += 1,
            }
            (pts, diag)
        })
        .collect();

    let mut diagnostics = BuildDiagnostics::default();
    for (pts, diag) in per_line {
        diagnostics.sections_total += diag.sections_total;
        diagnostics.sections_skipped += diag.sections_skipped;
        diagnostics.sections_failed += diag.sections_failed;
        diagnostics.curves_reliable += diag.curves_reliable;
        diagnostics.curves_unreliable += diag.curves_unreliable;
        for p in pts {
            cloud.push(&p, PointTag::LineSectionCurve);
        }
    }
    (cloud, diagnostics)
}

/// Fixed-coordinate tuples (x_2, ..., x_d) of all lattice section lines.
fn lattice_lines(dim: usize, n: usize, h: f64) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![]];
    }
    let mut lines = vec![vec![]];
    for _ in 1..dim {
        let mut next = Vec::with_capacity(lines.len() * n);
        for base in &lines {
            for j in 0..n {
                let mut v = base.clone();
                v.push(j as f64 * h);
                next.push(v);
            }
        }
        lines = next;
    }
    lines
}

/// Implicit approximation of the whole graph: a spline over ambient
/// [0,1]^{d+1} whose zero level stands for the graph boundary and whose
/// sign answers inclusion queries.
pub struct GraphApproximant {
    dim: usize,
    spline: TensorSpline,
    q0: PointCloud,
    q1: PointCloud,
    signed: SignedDistanceGrid,
    config: ReconstructConfig,
    diagnostics: BuildDiagnostics,
}

/// Per-axis inversion of the spline build's node-evaluation operator, so
/// that the spline built from the returned values runs through `values`
/// at every lattice node. Quasi-interpolation alone shifts node values by
/// O(h² · curvature), enough to flip the sign of near-boundary nodes; the
/// sharpened build keeps node signs exact while preserving the polynomial
/// reproduction of the underlying scheme.
fn sharpen_to_interpolate(degree: usize, dim: usize, n: usize, values: &[f64]) -> Result<Vec<f64>> {
    let step = 1.0 / (n - 1) as f64;
    let mut node_op = nalgebra::DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let s = TensorSpline::build(degree, 1, &e)?;
        for i in 0..n {
            node_op[(i, j)] = s.value(&[i as f64 * step]);
        }
    }
    let lu = node_op.lu();
    let mut out = values.to_vec();
    let mut line = nalgebra::DVector::zeros(n);
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        for flat in 0..out.len() {
            if (flat / stride) % n != 0 {
                continue;
            }
            for i in 0..n {
                line[i] = out[flat + i * stride];
            }
            let sol = lu.solve(&line).expect("spline node operator is invertible");
            for i in 0..n {
                out[flat + i * stride] = sol[i];
            }
        }
    }
    Ok(out)
}

pub fn build_graph_approximant(
    svf: &SampledSVF,
    config: &ReconstructConfig,
) -> Result<GraphApproximant> {
    let mls = MLSConfig::for_spacing(svf.h(), config.m);
    build_graph_approximant_with_mls(svf, config, &mls)
}

/// As [`build_graph_approximant`] with an explicit distance-estimation
/// setup (custom neighborhood radius or patch degree).
pub fn build_graph_approximant_with_mls(
    svf: &SampledSVF,
    config: &ReconstructConfig,
    mls: &MLSConfig,
) -> Result<GraphApproximant> {
    let q0 = collect_q0(svf);
    let (q1, diagnostics) = collect_q1_with(svf, config);
    let mut cloud = q0.clone();
    cloud.extend(&q1);
    if cloud.is_empty() {
        return Err(Error::EmptySet);
    }
    let signed = build_signed_grid(svf, &cloud, mls)?;
    let ambient = svf.dim() + 1;
    let sharp = sharpen_to_interpolate(
        config.p_spline,
        ambient,
        signed.n_per_axis(),
        signed.values(),
    )?;
    let spline = TensorSpline::build(config.p_spline, ambient, &sharp)?;
    Ok(GraphApproximant {
        dim: svf.dim(),
        spline,
        q0,
        q1,
        signed,
        config: config.clone(),
        diagnostics,
    })
}

impl GraphApproximant {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spline(&self) -> &TensorSpline {
        &self.spline
    }

    pub fn q0(&self) -> &PointCloud {
        &self.q0
    }

    pub fn q1(&self) -> &PointCloud {
        &self.q1
    }

    pub fn signed_grid(&self) -> &SignedDistanceGrid {
        &self.signed
    }

    pub fn config(&self) -> &ReconstructConfig {
        &self.config
    }

    pub fn diagnostics(&self) -> &BuildDiagnostics {
        &self.diagnostics
    }

    /// Membership of the image point `x` at abscissa `t`.
    pub fn inclusion(&self, t: f64, x: &[f64]) -> bool {
        let mut p = Vec::with_capacity(self.dim + 1);
        p.push(t);
        p.extend_from_slice(x);
        self.spline.value(&p) >= 0.0
    }

    /// Raster of the image at `t`; `res = 0` uses the lattice resolution.
    pub fn evaluate_set(&self, t: f64, res: usize) -> Result<GridSet> {
        raster_slice(&self.spline, t, res)
    }

    /// Zero level of the image at `t`: contour polylines for planar
    /// images, a triangle mesh for d = 3.
    pub fn boundary_slice(&self, t: f64, res: usize) -> Result<LevelSet> {
        zero_level_extract(&self.spline, &[(0, t)], res)
    }

    /// Zero level of the whole graph in ambient space (d = 2 only: the
    /// ambient dimension must be 3 for a mesh).
    pub fn boundary_mesh(&self, res: usize) -> Result<LevelSet> {
        zero_level_extract(&self.spline, &[], res)
    }
}

/// Fixed-t raster of a graph spline: the image slice as a value grid over
/// [0,1]^d. `res = 0` uses the spline's own lattice resolution.
pub fn raster_slice(spline: &TensorSpline, t: f64, res: usize) -> Result<GridSet> {
    if !(-1e-12..=1.0 + 1e-12).contains(&t) {
        return Err(Error::OutOfDomain(t));
    }
    let dim = spline.dim() - 1;
    let res = if res == 0 { spline.n_nodes() } else { res };
    let step = 1.0 / (res - 1) as f64;
    let total = res.pow(dim as u32);
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut p = vec![0.0; dim + 1];
            p[0] = t;
            let mut rem = flat;
            for a in (0..dim).rev() {
                p[a + 1] = (rem % res) as f64 * step;
                rem /= res;
            }
            spline.value(&p)
        })
        .collect();
    GridSet::new(dim, res, values)
}

/// Newton projection of a seed point onto the zero level of a spline.
/// Returns None when the gradient degenerates or the iteration fails to
/// reach the root tolerance.
pub fn project_to_zero(spline: &TensorSpline, seed: &[f64], max_iter: usize) -> Option<Vec<f64>> {
    let mut p = seed.to_vec();
    let mut grad = vec![0.0; p.len()];
    for _ in 0..max_iter.max(1) {
        let v = spline.value_and_gradient(&p, &mut grad);
        if v.abs() < 1e-12 {
            return Some(p);
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2 < 1e-18 {
            return None;
        }
        for (x, g) in p.iter_mut().zip(&grad) {
            *x = (*x - v * g / g2).clamp(0.0, 1.0);
        }
    }
    if spline.value(&p).abs() < 1e-9 {
        Some(p)
    } else {
        None
    }
}

/// As [`project_to_zero`] but holding the first coordinate fixed, so the
/// foot point stays inside the slice t = seed[0].
pub fn project_to_zero_in_slice(
    spline: &TensorSpline,
    seed: &[f64],
    max_iter: usize,
) -> Option<Vec<f64>> {
    let mut p = seed.to_vec();
    let mut grad = vec![0.0; p.len()];
    for _ in 0..max_iter.max(1) {
        let v = spline.value_and_gradient(&p, &mut grad);
        if v.abs() < 1e-12 {
            return Some(p);
        }
        let g2: f64 = grad.iter().skip(1).map(|g| g * g).sum();
        if g2 < 1e-18 {
            return None;
        }
        for (x, g) in p.iter_mut().zip(&grad).skip(1) {
            *x = (*x - v * g / g2).clamp(0.0, 1.0);
        }
    }
    if spline.value(&p).abs() < 1e-9 {
        Some(p)
    } else {
        None
    }
}

/// Unit normal from two transversal curve tangents; raises an error when
/// the tangents are within five degrees of parallel.
pub fn normal_from_tangents(a: &[f64; 3], b: &[f64; 3]) -> Result<[f64; 3]> {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    let nc = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    if na == 0.0 || nb == 0.0 || nc / (na * nb) < (5.0f64).to_radians().sin() {
        let angle_deg = if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            (nc / (na * nb)).clamp(-1.0, 1.0).asin().to_degrees()
        };
        return Err(Error::DegenerateTangents { angle_deg });
    }
    Ok([cross[0] / nc, cross[1] / nc, cross[2] / nc])
}

/// Outward unit normals of the graph boundary at the intersections of the
/// two curve families available for planar images: boundary curves of the
/// given samples (constant t) and section boundary curves (constant x_2).
/// Section tangents come from differentiating the fitted curve splines;
/// intersections within five steps of a topology change are skipped, as
/// the spline tangent degrades against the root-type steepening there.
/// Near-parallel intersections are skipped as well.
pub fn normals_at_curve_intersections(
    svf: &SampledSVF,
    config: &ReconstructConfig,
) -> Result<Vec<([f64; 3], [f64; 3])>> {
    if svf.dim() != 2 {
        return Err(Error::DimensionUnsupported(svf.dim()));
    }
    let h = svf.h();
    let n = svf.len();
    let mut out = Vec::new();
    for j in 0..n {
        let x2 = j as f64 * h;
        let section = match stage1_line_sections(svf, j, config) {
            Ok(s) => s,
            Err(Error::AllCurvesUnreliable) => continue,
            Err(e) => return Err(e),
        };
        for curve in section.curves().iter().filter(|c| c.reliable) {
            let spl = curve.spline();
            for i in curve.first_index..=curve.last_index() {
                let t = i as f64 * h;
                if section
                    .sites()
                    .iter()
                    .any(|s| (t - s.pct.t).abs() < 5.0 * h)
                {
                    continue;
                }
                let x1 = curve.ys[i - curve.first_index];
                let ta = [1.0, spl.deriv(t), 0.0];
                let sample = match svf.sample(i) {
                    SampleSet::Grid(g) => g,
                    SampleSet::Intervals(_) => return Err(Error::DimensionUnsupported(1)),
                };
                // In-plane gradient of the sample field; the boundary
                // tangent at constant t is its 90 degree rotation.
                let eps = 1e-5;
                let at =
                    |a: f64, b: f64| sample.interpolate(&[a.clamp(0.0, 1.0), b.clamp(0.0, 1.0)]);
                let g1 = (at(x1 + eps, x2) - at(x1 - eps, x2)) / (2.0 * eps);
                let g2 = (at(x1, x2 + eps) - at(x1, x2 - eps)) / (2.0 * eps);
                let tb = [0.0, -g2, g1];
                let normal = match normal_from_tangents(&ta, &tb) {
                    Ok(nrm) => nrm,
                    Err(Error::DegenerateTangents { .. }) => continue,
                    Err(e) => return Err(e),
                };
                // Orient outward: against the in-plane gradient, which
                // points toward the inside.
                let inward = normal[1] * g1 + normal[2] * g2;
                let flip = if inward > 0.0 { -1.0 } else { 1.0 };
                out.push((
                    [t, x1, x2],
                    [flip * normal[0], flip * normal[1], flip * normal[2]],
                ));
            }
        }
    }
    Ok(out)
}
