//! Distance estimation to an unknown boundary from scattered points near
//! it, via moving-least-squares projection, and assembly of the signed
//! distance lattice that the implicit spline is fitted to.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::cloud::{dist, HashGrid, PointCloud};
use crate::geom::sampled::{SampleSet, SampledSVF};

/// Parameters of the moving-least-squares projection.
#[derive(Debug, Clone)]
pub struct MLSConfig {
    /// Total degree of the local polynomial patch (one less than the
    /// smoothness order driving the error bound).
    pub degree: usize,
    /// Support radius of the weight function; must exceed twice the cloud
    /// fill distance or neighborhoods can come up empty.
    pub rho: f64,
    /// Cap on reference-plane iterations.
    pub max_plane_iters: usize,
    /// Pivot floor below which the neighborhood counts as degenerate.
    pub reg_floor: f64,
}

impl MLSConfig {
    /// Defaults tied to a sample spacing `h`: degree m-1 patch and a
    /// weight supported on 4h.
    pub fn for_spacing(h: f64, m: usize) -> Self {
        MLSConfig {
            degree: m.saturating_sub(1),
            rho: 4.0 * h,
            max_plane_iters: 10,
            reg_floor: 1e-12,
        }
    }
}

/// Compactly supported bump weight on [0, rho).
fn weight(r: f64, rho: f64) -> f64 {
    if r >= rho {
        0.0
    } else {
        let q = r / rho;
        let a = 1.0 - q;
        a * a * a * a * (4.0 * q + 1.0)
    }
}

/// Exponent tuples of all monomials in `vars` variables up to `degree`.
fn monomial_exponents(vars: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..vars {
        let mut next = Vec::new();
        for base in &out {
            let used: usize = base.iter().sum();
            for e in 0..=(degree - used) {
                let mut v = base.clone();
                v.push(e);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn eval_monomial(exp: &[usize], s: &[f64]) -> f64 {
    exp.iter().zip(s).map(|(&e, &x)| x.powi(e as i32)).product()
}

/// Projects `p` onto a local polynomial patch fitted to the cloud.
///
/// Returns the foot point on the patch and the point-to-patch distance.
/// The reference plane is found by iterating a weighted centroid plus
/// weighted principal directions; the patch is a weighted least-squares
/// polynomial of total degree `cfg.degree` over that plane, and the foot
/// point is located by Gauss-Newton seeded at the plane projection.
pub fn mls_project(p: &[f64], cloud: &PointCloud, cfg: &MLSConfig) -> Result<(Vec<f64>, f64)> {
    let index = HashGrid::build(cloud, cfg.rho);
    mls_project_indexed(p, cloud, &index, cfg)
}

/// As [`mls_project`] but reusing a prebuilt neighbor index.
pub fn mls_project_indexed(
    p: &[f64],
    cloud: &PointCloud,
    index: &HashGrid,
    cfg: &MLSConfig,
) -> Result<(Vec<f64>, f64)> {
    let dim = cloud.dim();
    let basis = monomial_exponents(dim - 1, cfg.degree);
    // Neighborhoods are centered near the surface, not at p: seed at the
    // nearest cloud point so that distant queries still see the cloud.
    let (seed_idx, _) = index.nearest(p)?;
    let ids = index.within(cloud.point(seed_idx), cfg.rho);
    if ids.len() < basis.len() {
        return Err(Error::InsufficientNeighbors {
            needed: basis.len(),
            got: ids.len(),
        });
    }

    let frame = reference_frame(p, cloud, &ids, cfg)?;
    patch_projection(p, cloud, &ids, &frame, &basis, cfg)
}

struct Frame {
    /// Plane projection of the query point (origin of local coordinates).
    origin: Vec<f64>,
    /// Rows: dim-1 tangent directions followed by the normal.
    axes: Vec<Vec<f64>>,
}

fn reference_frame(
    p: &[f64],
    cloud: &PointCloud,
    ids: &[usize],
    cfg: &MLSConfig,
) -> Result<Frame> {
    let dim = cloud.dim();
    let mut q: Vec<f64> = cloud.point(ids[0]).to_vec();
    // Start weighting around the neighbor closest to p.
    for &i in ids {
        if dist(cloud.point(i), p) < dist(&q, p) {
            q = cloud.point(i).to_vec();
        }
    }
    let mut normal: Option<Vec<f64>> = None;
    for _ in 0..cfg.max_plane_iters.max(1) {
        let mut wsum = 0.0;
        let mut c = vec![0.0; dim];
        for &i in ids {
            let x = cloud.point(i);
            let w = weight(dist(x, &q), cfg.rho);
            wsum += w;
            for a in 0..dim {
                c[a] += w * x[a];
            }
        }
        if wsum <= f64::MIN_POSITIVE {
            return Err(Error::InsufficientNeighbors { needed: 1, got: 0 });
        }
        for a in 0..dim {
            c[a] /= wsum;
        }

        let mut cov = nalgebra::DMatrix::zeros(dim, dim);
        for &i in ids {
            let x = cloud.point(i);
            let w = weight(dist(x, &q), cfg.rho);
            for a in 0..dim {
                for b in 0..dim {
                    cov[(a, b)] += w * (x[a] - c[a]) * (x[b] - c[b]);
                }
            }
        }
        let eig = cov.symmetric_eigen();
        // Ascending sort: the smallest-variance direction is the normal.
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| {
            let (va, vb): (f64, f64) = (eig.eigenvalues[a], eig.eigenvalues[b]);
            va.total_cmp(&vb)
        });
        let tangent_var: f64 = eig.eigenvalues[order[1]];
        let top_var: f64 = eig.eigenvalues[order[dim - 1]];
        if !(tangent_var > cfg.reg_floor * top_var.max(1.0)) {
            return Err(Error::DegenerateNeighborhood);
        }
        let mut n: Vec<f64> = (0..dim).map(|a| eig.eigenvectors[(a, order[0])]).collect();
        // Orient consistently toward the query point.
        let along: f64 = (0..dim).map(|a| (p[a] - c[a]) * n[a]).sum();
        if along < 0.0 {
            for v in &mut n {
                *v = -*v;
            }
        }

        // New origin: projection of p onto the plane through c.
        let off: f64 = (0..dim).map(|a| (p[a] - c[a]) * n[a]).sum();
        let q_next: Vec<f64> = (0..dim).map(|a| p[a] - off * n[a]).collect();

        let rotated = match &normal {
            Some(prev) => {
                let dot: f64 = prev.iter().zip(&n).map(|(a, b)| a * b).sum();
                (1.0 - dot.abs()).abs()
            }
            None => 1.0,
        };
        normal = Some(n);
        let moved = dist(&q_next, &q);
        q = q_next;
        if rotated < 1e-10 && moved < 1e-10 {
            break;
        }
    }

    let n = normal.expect("at least one plane iteration ran");
    let tangents = tangent_basis(&n);
    let mut axes = tangents;
    axes.push(n);
    Ok(Frame { origin: q, axes })
}

/// Completes a unit normal to an orthonormal basis; the normal goes last.
fn tangent_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let dim = n.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    for a in 0..dim {
        if basis.len() == dim - 1 {
            break;
        }
        let mut v = vec![0.0; dim];
        v[a] = 1.0;
        // Gram-Schmidt against the normal and earlier tangents.
        let dn: f64 = v.iter().zip(n).map(|(x, y)| x * y).sum();
        for i in 0..dim {
            v[i] -= dn * n[i];
        }
        for t in &basis {
            let dt: f64 = v.iter().zip(t).map(|(x, y)| x * y).sum();
            for i in 0..dim {
                v[i] -= dt * t[i];
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for x in &mut v {
                *x /= norm;
            }
            basis.push(v);
        }
    }
    basis
}

fn patch_projection(
    p: &[f64],
    cloud: &PointCloud,
    ids: &[usize],
    frame: &Frame,
    basis: &[Vec<usize>],
    cfg: &MLSConfig,
) -> Result<(Vec<f64>, f64)> {
    let dim = cloud.dim();
    let vars = dim - 1;
    let nb = basis.len();

    // Weighted least squares for the patch height over the plane.
    let mut a = nalgebra::DMatrix::zeros(ids.len(), nb);
    let mut b = nalgebra::DVector::zeros(ids.len());
    let mut s = vec![0.0; vars];
    for (row, &i) in ids.iter().enumerate() {
        let x = cloud.point(i);
        let w = weight(dist(x, &frame.origin), cfg.rho).sqrt();
        for v in 0..vars {
            s[v] = (0..dim).map(|a2| (x[a2] - frame.origin[a2]) * frame.axes[v][a2]).sum();
        }
        let z: f64 = (0..dim)
            .map(|a2| (x[a2] - frame.origin[a2]) * frame.axes[vars][a2])
            .sum();
        for (col, exp) in basis.iter().enumerate() {
            a[(row, col)] = w * eval_monomial(exp, &s);
        }
        b[row] = w * z;
    }
    let svd = a.svd(true, true);
    let coeffs = svd
        .solve(&b, cfg.reg_floor)
        .map_err(|_| Error::DegenerateNeighborhood)?;
    if svd.rank(cfg.reg_floor) < nb {
        return Err(Error::DegenerateNeighborhood);
    }

    // Gauss-Newton for the closest patch point; the plane projection of p
    // is the local origin, so the seed is s = 0.
    let patch = |s: &[f64]| -> Vec<f64> {
        let z: f64 = basis
            .iter()
            .zip(coeffs.iter())
            .map(|(exp, &c)| c * eval_monomial(exp, s))
            .sum();
        (0..dim)
            .map(|a2| {
                let mut x = frame.origin[a2] + z * frame.axes[vars][a2];
                for v in 0..vars {
                    x += s[v] * frame.axes[v][a2];
                }
                x
            })
            .collect()
    };
    let mut s = vec![0.0; vars];
    for _ in 0..30 {
        let at = patch(&s);
        let mut jac = nalgebra::DMatrix::zeros(dim, vars);
        for v in 0..vars {
            let dz: f64 = basis
                .iter()
                .zip(coeffs.iter())
                .map(|(exp, &c)| {
                    if exp[v] == 0 {
                        0.0
                    } else {
                        let mut e = exp.clone();
                        e[v] -= 1;
                        c * exp[v] as f64 * eval_monomial(&e, &s)
                    }
                })
                .sum();
            for a2 in 0..dim {
                jac[(a2, v)] = frame.axes[v][a2] + dz * frame.axes[vars][a2];
            }
        }
        let r = nalgebra::DVector::from_iterator(dim, (0..dim).map(|a2| p[a2] - at[a2]));
        let jt = jac.transpose();
        let lhs = &jt * &jac;
        let rhs = &jt * &r;
        let step = match lhs.lu().solve(&rhs) {
            Some(x) => x,
            None => break,
        };
        let mut norm2 = 0.0;
        for v in 0..vars {
            s[v] += step[v];
            norm2 += step[v] * step[v];
        }
        if norm2.sqrt() < 1e-12 {
            break;
        }
    }
    let foot = patch(&s);
    let distance = dist(p, &foot);
    Ok((foot, distance))
}

/// Signed distances on the uniform ambient lattice used for spline
/// fitting: magnitudes from the cloud, signs from sample membership.
#[derive(Debug, Clone)]
pub struct SignedDistanceGrid {
    ambient_dim: usize,
    n_per_axis: usize,
    values: Vec<f64>,
    far: Vec<bool>,
}

impl SignedDistanceGrid {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n_per_axis - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn far_flags(&self) -> &[bool] {
        &self.far
    }

    pub fn value_at(&self, idx: &[usize]) -> f64 {
        self.values[self.flatten(idx)]
    }

    pub fn is_far_at(&self, idx: &[usize]) -> bool {
        self.far[self.flatten(idx)]
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.ambient_dim);
        let mut flat = 0usize;
        for &i in idx {
            debug_assert!(i < self.n_per_axis);
            flat = flat * self.n_per_axis + i;
        }
        flat
    }
}

/// True when the lattice point (given by image-axis coordinates `x` and
/// the sample at index `i`) belongs to the sampled set.
fn lattice_membership(svf: &SampledSVF, i: usize, x: &[f64]) -> bool {
    match svf.sample(i) {
        SampleSet::Intervals(u) => u.contains(x[0]),
        SampleSet::Grid(g) => g.interpolate(x) >= 0.0,
    }
}

/// Builds the signed distance lattice over [0,1]^{d+1} at the sample
/// spacing. Magnitudes come from MLS projection onto the cloud; points
/// farther than 3(m+1)h from the cloud keep their nearest-point distance
/// and are flagged far (they never carry the zero level). Signs come from
/// membership of each lattice point in its hosting cross-section.
pub fn build_signed_grid(
    svf: &SampledSVF,
    cloud: &PointCloud,
    cfg: &MLSConfig,
) -> Result<SignedDistanceGrid> {
    let ambient = svf.dim() + 1;
    if cloud.dim() != ambient {
        return Err(Error::DimensionMismatch(format!(
            "cloud dimension {} does not match ambient dimension {}",
            cloud.dim(),
            ambient
        )));
    }
    if cloud.is_empty() {
        return Err(Error::EmptySet);
    }
    let h = svf.h();
    let n = svf.len();
    let far_cutoff = 3.0 * (cfg.degree + 2) as f64 * h;
    let index = HashGrid::build(cloud, cfg.rho);
    let total = n.pow(ambient as u32);

    let entries: Result<Vec<(f64, bool)>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = vec![0usize; ambient];
            let mut rem = flat;
            for a in (0..ambient).rev() {
                idx[a] = rem % n;
                rem /= n;
            }
            let p: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            let (near_idx, near_dist) = index.nearest(&p)?;
            let _ = near_idx;
            let (magnitude, far) = if near_dist > far_cutoff {
                (near_dist, true)
            } else {
                let (_, d) = mls_project_indexed(&p, cloud, &index, cfg)?;
                (d, false)
            };
            let inside = lattice_membership(svf, idx[0], &p[1..]);
            Ok((if inside { magnitude } else { -magnitude }, far))
        })
        .collect();
    let entries = entries?;

    Ok(SignedDistanceGrid {
        ambient_dim: ambient,
        n_per_axis: n,
        values: entries.iter().map(|e| e.0).collect(),
        far: entries.iter().map(|e| e.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::cloud::PointTag;
    use crate::phantoms;

    fn line_cloud(n: usize) -> PointCloud {
        let mut c = PointCloud::new(2);
        for i in 0..=n {
            c.push(&[i as f64 / n as f64, 0.0], PointTag::SampleBoundary);
        }
        c
    }

    fn circle_cloud(r: f64, spacing: f64) -> PointCloud {
        let n = (2.0 * std::f64::consts::PI * r / spacing).ceil() as usize;
        let mut c = PointCloud::new(2);
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            c.push(&[0.5 + r * th.cos(), 0.5 + r * th.sin()], PointTag::SampleBoundary);
        }
        c
    }

    #[test]
    fn distance_to_a_line_is_exact() {
        let cloud = line_cloud(100);
        let cfg = MLSConfig::for_spacing(0.01, 3);
        let (foot, d) = mls_project(&[0.3, 0.2], &cloud, &cfg).unwrap();
        assert!((d - 0.2).abs() < 1e-9, "d = {d}");
        assert!(foot[1].abs() < 1e-9);
        assert!((foot[0] - 0.3).abs() < 1e-9);
    }

    #[test]
    fn too_few_neighbors_for_the_basis_is_an_error() {
        let mut cloud = PointCloud::new(3);
        cloud.push(&[0.1, 0.2, 0.0], PointTag::SampleBoundary);
        cloud.push(&[0.3, 0.1, 0.0], PointTag::SampleBoundary);
        cloud.push(&[0.2, 0.4, 0.0], PointTag::SampleBoundary);
        let cfg = MLSConfig { degree: 2, rho: 1.0, max_plane_iters: 10, reg_floor: 1e-12 };
        // Total-degree-2 basis in two variables has six monomials.
        match mls_project(&[0.2, 0.2, 0.05], &cloud, &cfg) {
            Err(Error::InsufficientNeighbors { .. }) => {}
            other => panic!("expected InsufficientNeighbors, got {other:?}"),
        }
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let mut cloud = PointCloud::new(2);
        for _ in 0..8 {
            cloud.push(&[0.4, 0.4], PointTag::SampleBoundary);
        }
        let cfg = MLSConfig { degree: 1, rho: 0.5, max_plane_iters: 10, reg_floor: 1e-12 };
        match mls_project(&[0.45, 0.4], &cloud, &cfg) {
            Err(Error::DegenerateNeighborhood) => {}
            other => panic!("expected DegenerateNeighborhood, got {other:?}"),
        }
    }

    #[test]
    fn circle_distance_error_shrinks_at_high_order() {
        let r = 0.3;
        let offset = 0.05;
        let p = [0.5 + (r + offset) * 0.6_f64.cos(), 0.5 + (r + offset) * 0.6_f64.sin()];
        let err_at = |h: f64| -> f64 {
            let cloud = circle_cloud(r, h);
            let cfg = MLSConfig::for_spacing(h, 3);
            let (_, d) = mls_project(&p, &cloud, &cfg).unwrap();
            (d - offset).abs()
        };
        let e1 = err_at(1.0 / 32.0);
        let e2 = err_at(1.0 / 128.0);
        let order = (e1 / e2).log2() / 2.0;
        assert!(order > 2.5, "order = {order:.2} (e1 = {e1:.2e}, e2 = {e2:.2e})");
    }

    #[test]
    fn projection_foot_lands_near_the_circle() {
        let h = 1.0 / 64.0;
        let cloud = circle_cloud(0.3, h);
        let cfg = MLSConfig::for_spacing(h, 3);
        let (foot, _) = mls_project(&[0.82, 0.5], &cloud, &cfg).unwrap();
        let rad = (foot[0] - 0.5).hypot(foot[1] - 0.5);
        assert!((rad - 0.3).abs() < 1e-5, "rad = {rad}");
    }

    #[test]
    fn signed_grid_on_the_disk_phantom() {
        let ph = phantoms::by_name("disk").unwrap();
        let svf = ph.sample(64, 0).unwrap();
        let cloud = ph.boundary_samples(512);
        let cfg = MLSConfig::for_spacing(svf.h(), 3);
        let grid = build_signed_grid(&svf, &cloud, &cfg).unwrap();
        assert_eq!(grid.ambient_dim(), 2);
        assert_eq!(grid.n_per_axis(), 65);

        // Center of the disk: inside, distance close to the radius.
        let center = grid.value_at(&[32, 32]);
        assert!(center > 0.0);
        assert!((center - 0.3).abs() < 0.02, "center = {center}");

        // Corner: outside the 12h band, far-flagged, magnitude at least
        // the clamp gap of 2(m+1)h.
        assert!(grid.is_far_at(&[0, 0]));
        let corner = grid.value_at(&[0, 0]);
        assert!(corner < 0.0);
        assert!(corner.abs() >= 2.0 * 4.0 * svf.h());
    }

    #[test]
    fn sign_matches_membership_everywhere() {
        let ph = phantoms::by_name("disk").unwrap();
        let svf = ph.sample(16, 0).unwrap();
        let cloud = ph.boundary_samples(512);
        let cfg = MLSConfig::for_spacing(svf.h(), 3);
        let grid = build_signed_grid(&svf, &cloud, &cfg).unwrap();
        let h = svf.h();
        for i in 0..17 {
            for j in 0..17 {
                let inside = svf.intervals_at(i).unwrap().contains(j as f64 * h);
                let v = grid.value_at(&[i, j]);
                assert_eq!(v >= 0.0, inside, "node ({i},{j}) value {v}");
            }
        }
    }

    #[test]
    fn zero_level_stays_out_of_far_cells() {
        let ph = phantoms::by_name("disk").unwrap();
        let svf = ph.sample(16, 0).unwrap();
        let cloud = ph.boundary_samples(512);
        let cfg = MLSConfig::for_spacing(svf.h(), 3);
        let grid = build_signed_grid(&svf, &cloud, &cfg).unwrap();
        let n = grid.n_per_axis();
        for i in 0..n {
            for j in 0..n {
                for (di, dj) in [(1usize, 0usize), (0, 1)] {
                    if i + di >= n || j + dj >= n {
                        continue;
                    }
                    let a = grid.value_at(&[i, j]);
                    let b = grid.value_at(&[i + di, j + dj]);
                    if (a >= 0.0) != (b >= 0.0) {
                        assert!(
                            !grid.is_far_at(&[i, j]) && !grid.is_far_at(&[i + di, j + dj]),
                            "sign change touches a far-flagged node at ({i},{j})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn monomial_bases_have_expected_sizes() {
        assert_eq!(monomial_exponents(1, 2).len(), 3);
        assert_eq!(monomial_exponents(2, 2).len(), 6);
        assert_eq!(monomial_exponents(3, 2).len(), 10);
    }
}
