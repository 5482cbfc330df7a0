//! Plain-text dumps of reconstruction products for external viewers:
//! point clouds with a one-line header, zero levels as Wavefront OBJ
//! (contour polylines as `l` records, triangle meshes as `f` records),
//! and raw rasters.

use std::fmt::Write as _;

use crate::geom::cloud::PointCloud;
use crate::geom::grid::GridSet;
use crate::geom::interval::IntervalUnion;
use crate::quasi::marching::LevelSet;

/// `<count> <dim>` header, then one whitespace-separated point per line.
pub fn points_text(cloud: &PointCloud) -> String {
    let mut out = format!("{} {}\n", cloud.len(), cloud.dim());
    for p in cloud.iter() {
        for (j, v) in p.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// Indexed OBJ text. Planar contours become `v x y 0` vertices joined by
/// `l` polylines (closed by repeating the first index); meshes become
/// `v x y z` vertices and 1-based `f` triangles.
pub fn mesh_obj(level: &LevelSet) -> String {
    let mut out = String::new();
    match level {
        LevelSet::Contours(loops) => {
            let mut base = 1usize;
            for polyline in loops {
                for p in polyline {
                    let _ = writeln!(out, "v {} {} 0", p[0], p[1]);
                }
                let mut line = String::from("l");
                for i in 0..polyline.len() {
                    let _ = write!(line, " {}", base + i);
                }
                let _ = write!(line, " {base}");
                out.push_str(&line);
                out.push('\n');
                base += polyline.len();
            }
        }
        LevelSet::Mesh(mesh) => {
            for v in &mesh.vertices {
                let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
            }
            for t in &mesh.triangles {
                let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
            }
        }
    }
    out
}

/// `grid <dim> <n_per_axis>` header, then the raster values row-major
/// with the last axis fastest, one row per line.
pub fn grid_text(grid: &GridSet) -> String {
    let mut out = format!("grid {} {}\n", grid.dim(), grid.n_per_axis());
    for row in grid.values().chunks(grid.n_per_axis()) {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// `intervals <count>` header, then one `lo hi` pair per line.
pub fn intervals_text(u: &IntervalUnion) -> String {
    let mut out = format!("intervals {}\n", u.count());
    for &(lo, hi) in u.intervals() {
        let _ = writeln!(out, "{lo} {hi}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::cloud::PointTag;

    #[test]
    fn point_dump_has_header_and_rows() {
        let mut cloud = PointCloud::new(2);
        cloud.push(&[0.25, 0.5], PointTag::SampleBoundary);
        cloud.push(&[0.75, 0.125], PointTag::SampleBoundary);
        assert_eq!(points_text(&cloud), "2 2\n0.25 0.5\n0.75 0.125\n");
    }

    #[test]
    fn contours_become_closed_polylines() {
        let level = LevelSet::Contours(vec![vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]]);
        let obj = mesh_obj(&level);
        assert_eq!(obj, "v 0 0 0\nv 1 0 0\nv 1 1 0\nl 1 2 3 1\n");
    }

    #[test]
    fn mesh_faces_are_one_based() {
        let level = LevelSet::Mesh(crate::quasi::marching::TriangleMesh {
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            triangles: vec![[0, 1, 2]],
        });
        let obj = mesh_obj(&level);
        assert_eq!(obj, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    }
}
