//! Zero-level extraction from implicit functions on [0,1]^2 and [0,1]^3.
//!
//! Cells of a uniform evaluation grid are processed face by face: each face
//! contributes line segments by the marching-squares rules with the
//! asymptotic decider on its bilinear interpolant, and in 3D the per-cell
//! face segments always close into loops, which are fanned into triangles.
//! Both adjacent cells compute identical segments for a shared face, so the
//! mesh is consistent without a case table. Crossing vertices are refined
//! along grid edges by bisection.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::interval::ROOT_TOL;
use crate::quasi::tensor::TensorSpline;

/// Indexed triangle list in 3D.
#[derive(Debug, Clone, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// True when every edge is shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        if self.triangles.is_empty() {
            return false;
        }
        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        edge_count.values().all(|&c| c == 2)
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

/// Zero-level output: closed/open polylines in 2D, a triangle mesh in 3D.
#[derive(Debug, Clone)]
pub enum LevelSet {
    Contours(Vec<Vec<[f64; 2]>>),
    Mesh(TriangleMesh),
}

/// Extract the zero level of a spline after fixing some coordinates; the
/// number of free coordinates must be 2 or 3. `res = 0` picks twice the
/// spline's knot resolution.
pub fn zero_level_extract(
    spline: &TensorSpline,
    fixed: &[(usize, f64)],
    res: usize,
) -> Result<LevelSet> {
    let free: Vec<usize> = (0..spline.dim())
        .filter(|a| fixed.iter().all(|(fa, _)| fa != a))
        .collect();
    if fixed.len() + free.len() != spline.dim() {
        return Err(Error::InvalidArgument(
            "fixed coordinate listed twice or out of range".into(),
        ));
    }
    let res = if res == 0 {
        2 * (spline.n_nodes() - 1)
    } else {
        res
    };
    let assemble = |p: &[f64]| {
        let mut full = vec![0.0; spline.dim()];
        for &(a, v) in fixed {
            full[a] = v;
        }
        for (slot, &a) in free.iter().enumerate() {
            full[a] = p[slot];
        }
        full
    };
    match free.len() {
        2 => {
            let f = |x: f64, y: f64| spline.value(&assemble(&[x, y]));
            Ok(LevelSet::Contours(extract_contours(&f, res)))
        }
        3 => {
            let f = |p: &[f64; 3]| spline.value(&assemble(p));
            let g = |p: &[f64; 3]| {
                let full = assemble(p);
                let grad = spline.gradient(&full);
                [grad[free[0]], grad[free[1]], grad[free[2]]]
            };
            Ok(LevelSet::Mesh(extract_surface(&f, &g, res)))
        }
        k => Err(Error::DimensionUnsupported(k)),
    }
}

/// Marching-squares pairing on one face. Corner values are in cyclic order
/// v0 -> v1 -> v2 -> v3; edge slot e_i joins v_i and v_{i+1}. Returns up to
/// two segments as pairs of edge slots.
fn face_segments(v: [f64; 4]) -> ([(usize, usize); 2], usize) {
    let inside = [v[0] >= 0.0, v[1] >= 0.0, v[2] >= 0.0, v[3] >= 0.0];
    let mask = inside.iter().enumerate().fold(0usize, |m, (i, &b)| {
        m | ((b as usize) << i)
    });
    let mut out = [(0usize, 0usize); 2];
    match mask {
        0b0000 | 0b1111 => ([(0, 0); 2], 0),
        // one corner isolated (inside or outside): its two incident edges
        0b0001 | 0b1110 => {
            out[0] = (3, 0);
            (out, 1)
        }
        0b0010 | 0b1101 => {
            out[0] = (0, 1);
            (out, 1)
        }
        0b0100 | 0b1011 => {
            out[0] = (1, 2);
            (out, 1)
        }
        0b1000 | 0b0111 => {
            out[0] = (2, 3);
            (out, 1)
        }
        // two adjacent corners inside: the edge pair flanking that side
        0b0011 => {
            out[0] = (3, 1);
            (out, 1)
        }
        0b0110 => {
            out[0] = (0, 2);
            (out, 1)
        }
        0b1100 => {
            out[0] = (1, 3);
            (out, 1)
        }
        0b1001 => {
            out[0] = (2, 0);
            (out, 1)
        }
        // diagonal cases: resolve with the bilinear saddle value
        0b0101 | 0b1010 => {
            let dnm = v[0] + v[2] - v[1] - v[3];
            let joined = if dnm != 0.0 {
                (v[0] * v[2] - v[1] * v[3]) / dnm >= 0.0
            } else {
                false
            };
            let inside_even = mask == 0b0101;
            // "joined" means the inside diagonal connects through the face
            // center, so the arcs wrap the other two corners
            let wrap_odd = inside_even == joined;
            if wrap_odd {
                out[0] = (0, 1);
                out[1] = (2, 3);
            } else {
                out[0] = (3, 0);
                out[1] = (1, 2);
            }
            (out, 2)
        }
        _ => unreachable!(),
    }
}

fn bisect_edge(f: &impl Fn(f64) -> f64, v0: f64, v1: f64) -> f64 {
    let (mut s_in, mut s_out): (f64, f64) =
        if v0 >= 0.0 { (0.0, 1.0) } else { (1.0, 0.0) };
    debug_assert!((v0 >= 0.0) != (v1 >= 0.0));
    for _ in 0..48 {
        if (s_in - s_out).abs() <= ROOT_TOL {
            break;
        }
        let mid = 0.5 * (s_in + s_out);
        if f(mid) >= 0.0 {
            s_in = mid;
        } else {
            s_out = mid;
        }
    }
    0.5 * (s_in + s_out)
}

/// Polylines of the zero level of f over [0,1]^2 on a res x res cell grid.
/// Closed loops repeat their first point at the end.
pub fn extract_contours(f: &(impl Fn(f64, f64) -> f64 + Sync), res: usize) -> Vec<Vec<[f64; 2]>> {
    let n = res + 1;
    let step = 1.0 / res as f64;
    let values: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| f((idx / n) as f64 * step, (idx % n) as f64 * step))
        .collect();
    let at = |i: usize, j: usize| values[i * n + j];

    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut edge_vertex: HashMap<(u8, usize, usize), usize> = HashMap::new();
    let mut segments: Vec<(usize, usize)> = Vec::new();

    let mut vertex_on = |axis: u8,
                         i: usize,
                         j: usize,
                         vertices: &mut Vec<[f64; 2]>|
     -> usize {
        *edge_vertex.entry((axis, i, j)).or_insert_with(|| {
            let (x0, y0) = (i as f64 * step, j as f64 * step);
            let (v0, v1, dir) = if axis == 0 {
                (at(i, j), at(i + 1, j), [step, 0.0])
            } else {
                (at(i, j), at(i, j + 1), [0.0, step])
            };
            let s = bisect_edge(
                &|s| f(x0 + s * dir[0], y0 + s * dir[1]),
                v0,
                v1,
            );
            vertices.push([x0 + s * dir[0], y0 + s * dir[1]]);
            vertices.len() - 1
        })
    };

    for ci in 0..res {
        for cj in 0..res {
            let corners = [
                at(ci, cj),
                at(ci + 1, cj),
                at(ci + 1, cj + 1),
                at(ci, cj + 1),
            ];
            let (segs, count) = face_segments(corners);
            if count == 0 {
                continue;
            }
            // edge slots: 0 bottom (axis 0 at cj), 1 right (axis 1 at ci+1),
            // 2 top (axis 0 at cj+1), 3 left (axis 1 at ci)
            let mut slot_vertex = |slot: usize, vertices: &mut Vec<[f64; 2]>| match slot {
                0 => vertex_on(0, ci, cj, vertices),
                1 => vertex_on(1, ci + 1, cj, vertices),
                2 => vertex_on(0, ci, cj + 1, vertices),
                _ => vertex_on(1, ci, cj, vertices),
            };
            for &(sa, sb) in segs.iter().take(count) {
                let va = slot_vertex(sa, &mut vertices);
                let vb = slot_vertex(sb, &mut vertices);
                if va != vb {
                    segments.push((va, vb));
                }
            }
        }
    }
    chain_segments(&vertices, &segments)
}

fn chain_segments(vertices: &[[f64; 2]], segments: &[(usize, usize)]) -> Vec<Vec<[f64; 2]>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vertices.len()];
    for (si, &(a, b)) in segments.iter().enumerate() {
        adj[a].push((si, b));
        adj[b].push((si, a));
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    // open chains start at odd-degree vertices, loops at any leftover
    let starts: Vec<usize> = (0..vertices.len())
        .filter(|&v| adj[v].len() == 1)
        .chain(0..vertices.len())
        .collect();
    for start in starts {
        for &(s0, _) in &adj[start] {
            if used[s0] {
                continue;
            }
            let mut line = vec![vertices[start]];
            let mut cur = start;
            let mut seg = s0;
            loop {
                used[seg] = true;
                let (a, b) = segments[seg];
                cur = if a == cur { b } else { a };
                line.push(vertices[cur]);
                match adj[cur].iter().find(|&&(s, _)| !used[s]) {
                    Some(&(s, _)) => seg = s,
                    None => break,
                }
            }
            out.push(line);
        }
    }
    out
}

/// Triangle mesh of the zero level of f over [0,1]^3 on a res^3 cell grid.
/// Triangles are oriented with normals pointing out of the region f >= 0,
/// using the supplied gradient.
pub fn extract_surface(
    f: &(impl Fn(&[f64; 3]) -> f64 + Sync),
    grad: &impl Fn(&[f64; 3]) -> [f64; 3],
    res: usize,
) -> TriangleMesh {
    let n = res + 1;
    let step = 1.0 / res as f64;
    let values: Vec<f64> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let k = idx % n;
            let j = (idx / n) % n;
            let i = idx / (n * n);
            f(&[i as f64 * step, j as f64 * step, k as f64 * step])
        })
        .collect();
    let at = |c: [usize; 3]| values[(c[0] * n + c[1]) * n + c[2]];

    let mut mesh = TriangleMesh::default();
    let mut edge_vertex: HashMap<(u8, [usize; 3]), usize> = HashMap::new();

    for ci in 0..res {
        for cj in 0..res {
            for ck in 0..res {
                let base = [ci, cj, ck];
                let mut any_in = false;
                let mut any_out = false;
                for b in 0..8usize {
                    let c = [
                        base[0] + (b & 1),
                        base[1] + ((b >> 1) & 1),
                        base[2] + ((b >> 2) & 1),
                    ];
                    if at(c) >= 0.0 {
                        any_in = true;
                    } else {
                        any_out = true;
                    }
                }
                if !(any_in && any_out) {
                    continue;
                }
                process_cell(
                    base,
                    &at,
                    f,
                    grad,
                    step,
                    &mut edge_vertex,
                    &mut mesh,
                );
            }
        }
    }
    mesh
}

fn edge_vertex_id(
    axis: usize,
    origin: [usize; 3],
    at: &impl Fn([usize; 3]) -> f64,
    f: &impl Fn(&[f64; 3]) -> f64,
    step: f64,
    cache: &mut HashMap<(u8, [usize; 3]), usize>,
    mesh: &mut TriangleMesh,
) -> usize {
    if let Some(&v) = cache.get(&(axis as u8, origin)) {
        return v;
    }
    let mut tip = origin;
    tip[axis] += 1;
    let (v0, v1) = (at(origin), at(tip));
    let p0 = [
        origin[0] as f64 * step,
        origin[1] as f64 * step,
        origin[2] as f64 * step,
    ];
    let s = bisect_edge(
        &|s| {
            let mut p = p0;
            p[axis] += s * step;
            f(&p)
        },
        v0,
        v1,
    );
    let mut p = p0;
    p[axis] += s * step;
    mesh.vertices.push(p);
    let id = mesh.vertices.len() - 1;
    cache.insert((axis as u8, origin), id);
    id
}

fn process_cell(
    base: [usize; 3],
    at: &impl Fn([usize; 3]) -> f64,
    f: &impl Fn(&[f64; 3]) -> f64,
    grad: &impl Fn(&[f64; 3]) -> [f64; 3],
    step: f64,
    cache: &mut HashMap<(u8, [usize; 3]), usize>,
    mesh: &mut TriangleMesh,
) {
    // collect segments from the six faces; each segment joins two
    // crossing-edge vertices of the cube
    let mut segs: Vec<(usize, usize)> = Vec::with_capacity(12);
    for a in 0..3usize {
        let (b, c) = match a {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for side in 0..2usize {
            // cyclic corners of the face in the (b, c) plane
            let corner = |bb: usize, cc: usize| {
                let mut node = base;
                node[a] += side;
                node[b] += bb;
                node[c] += cc;
                node
            };
            let cyc = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
            let vals = [at(cyc[0]), at(cyc[1]), at(cyc[2]), at(cyc[3])];
            let (pairs, count) = face_segments(vals);
            if count == 0 {
                continue;
            }
            // edge slot i joins cyclic corners i and i+1
            let slot_edge = |slot: usize| -> (usize, [usize; 3]) {
                let (c0, c1) = (cyc[slot], cyc[(slot + 1) % 4]);
                let axis = (0..3).find(|&x| c0[x] != c1[x]).unwrap();
                let origin = [
                    c0[0].min(c1[0]),
                    c0[1].min(c1[1]),
                    c0[2].min(c1[2]),
                ];
                (axis, origin)
            };
            for &(sa, sb) in pairs.iter().take(count) {
                let (axa, oa) = slot_edge(sa);
                let (axb, ob) = slot_edge(sb);
                let va = edge_vertex_id(axa, oa, at, f, step, cache, mesh);
                let vb = edge_vertex_id(axb, ob, at, f, step, cache, mesh);
                if va != vb {
                    segs.push((va, vb));
                }
            }
        }
    }
    if segs.is_empty() {
        return;
    }

    // walk the segments into closed loops
    let mut used = vec![false; segs.len()];
    for s0 in 0..segs.len() {
        if used[s0] {
            continue;
        }
        let mut loop_verts = vec![segs[s0].0, segs[s0].1];
        used[s0] = true;
        let guard = segs.len() + 2;
        for _ in 0..guard {
            let cur = *loop_verts.last().unwrap();
            if cur == loop_verts[0] {
                break;
            }
            let next = (0..segs.len()).find(|&s| {
                !used[s] && (segs[s].0 == cur || segs[s].1 == cur)
            });
            match next {
                Some(s) => {
                    used[s] = true;
                    let (a, b) = segs[s];
                    loop_verts.push(if a == cur { b } else { a });
                }
                None => break,
            }
        }
        if loop_verts.len() < 4 || loop_verts[0] != *loop_verts.last().unwrap() {
            continue;
        }
        loop_verts.pop();
        emit_loop(&loop_verts, grad, mesh);
    }
}

fn emit_loop(loop_verts: &[usize], grad: &impl Fn(&[f64; 3]) -> [f64; 3], mesh: &mut TriangleMesh) {
    let tri_oriented = |a: usize, b: usize, c: usize, mesh: &TriangleMesh| {
        let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        let u = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
        let v = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
        let nrm = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        let ctr = [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
            (pa[2] + pb[2] + pc[2]) / 3.0,
        ];
        let g = grad(&ctr);
        // outward normal points where f decreases
        if nrm[0] * g[0] + nrm[1] * g[1] + nrm[2] * g[2] <= 0.0 {
            [a, b, c]
        } else {
            [a, c, b]
        }
    };
    if loop_verts.len() == 3 {
        let t = tri_oriented(loop_verts[0], loop_verts[1], loop_verts[2], mesh);
        mesh.triangles.push(t);
        return;
    }
    let mut ctr = [0.0f64; 3];
    for &v in loop_verts {
        for a in 0..3 {
            ctr[a] += mesh.vertices[v][a];
        }
    }
    for c in ctr.iter_mut() {
        *c /= loop_verts.len() as f64;
    }
    mesh.vertices.push(ctr);
    let cid = mesh.vertices.len() - 1;
    for i in 0..loop_verts.len() {
        let t = tri_oriented(
            cid,
            loop_verts[i],
            loop_verts[(i + 1) % loop_verts.len()],
            mesh,
        );
        mesh.triangles.push(t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::dist;

    #[test]
    fn circle_vertices_land_on_the_circle() {
        let f = |x: f64, y: f64| 0.3 - ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
        let lines = extract_contours(&f, 64);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert_eq!(line.first(), line.last());
        for p in line {
            let r = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)).sqrt();
            assert!((r - 0.3).abs() < 1e-6, "vertex off circle by {}", (r - 0.3).abs());
        }
        // sampling the circle, nobody is far from the polyline
        let mut worst = 0.0f64;
        for k in 0..500 {
            let a = k as f64 / 500.0 * std::f64::consts::TAU;
            let q = [0.5 + 0.3 * a.cos(), 0.5 + 0.3 * a.sin()];
            let d = line
                .iter()
                .map(|p| dist(p, &q))
                .fold(f64::MAX, f64::min);
            worst = worst.max(d);
        }
        assert!(worst < 2.0 / 64.0, "circle to polyline gap {worst}");
    }

    #[test]
    fn sphere_mesh_watertight_and_on_surface() {
        let f = |p: &[f64; 3]| {
            0.3 - ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2)).sqrt()
        };
        let g = |p: &[f64; 3]| {
            let r = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2))
                .sqrt()
                .max(1e-12);
            [
                -(p[0] - 0.5) / r,
                -(p[1] - 0.5) / r,
                -(p[2] - 0.5) / r,
            ]
        };
        let mesh = extract_surface(&f, &g, 64);
        assert!(mesh.is_watertight());
        // crossing-edge vertices are refined onto the surface; loop
        // centroids sit a chord-sagitta inside it
        let mut crossing_ok = 0;
        for v in &mesh.vertices {
            let r = ((v[0] - 0.5).powi(2) + (v[1] - 0.5).powi(2) + (v[2] - 0.5).powi(2)).sqrt();
            assert!((r - 0.3).abs() < 5e-4, "vertex off sphere by {}", (r - 0.3).abs());
            if (r - 0.3).abs() < 1e-5 {
                crossing_ok += 1;
            }
        }
        assert!(crossing_ok * 2 > mesh.vertices.len());
    }

    #[test]
    fn no_sign_change_gives_empty_output() {
        let lines = extract_contours(&|_, _| 1.0, 16);
        assert!(lines.is_empty());
        let mesh = extract_surface(&|_: &[f64; 3]| -1.0, &|_| [0.0, 0.0, 1.0], 8);
        assert!(mesh.is_empty());
        assert!(!mesh.is_watertight());
    }

    #[test]
    fn normals_point_outward() {
        let f = |p: &[f64; 3]| {
            0.3 - ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2)).sqrt()
        };
        let g = |p: &[f64; 3]| {
            let r = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2))
                .sqrt()
                .max(1e-12);
            [-(p[0] - 0.5) / r, -(p[1] - 0.5) / r, -(p[2] - 0.5) / r]
        };
        let mesh = extract_surface(&f, &g, 24);
        for t in &mesh.triangles {
            let (a, b, c) = (
                mesh.vertices[t[0]],
                mesh.vertices[t[1]],
                mesh.vertices[t[2]],
            );
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            let ctr = [
                (a[0] + b[0] + c[0]) / 3.0 - 0.5,
                (a[1] + b[1] + c[1]) / 3.0 - 0.5,
                (a[2] + b[2] + c[2]) / 3.0 - 0.5,
            ];
            let dot = n[0] * ctr[0] + n[1] * ctr[1] + n[2] * ctr[2];
            assert!(dot > 0.0, "inward-facing triangle");
        }
    }

    #[test]
    fn spline_level_set_dispatch() {
        let n = 17;
        let mut values = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
                values.push(0.09 - (x - 0.5).powi(2) - (y - 0.5).powi(2));
            }
        }
        let s = TensorSpline::build(3, 2, &values).unwrap();
        match zero_level_extract(&s, &[], 0).unwrap() {
            LevelSet::Contours(lines) => {
                assert_eq!(lines.len(), 1);
                for p in &lines[0] {
                    let r = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)).sqrt();
                    assert!((r - 0.3).abs() < 1e-4);
                }
            }
            LevelSet::Mesh(_) => panic!("expected contours"),
        }
    }
}
