//! Point clouds with a uniform hash-grid index for nearest-point queries.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Provenance of a cloud point: a root of the implicit samples along a grid
/// edge, or a point taken from a reconstructed section boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointTag {
    SampleBoundary,
    LineSectionCurve,
}

/// Flat storage of n points in `dim` coordinates each.
#[derive(Debug, Clone)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    tags: Vec<PointTag>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        PointCloud {
            dim,
            coords: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn push(&mut self, p: &[f64], tag: PointTag) {
        debug_assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
        self.tags.push(tag);
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn tag(&self, i: usize) -> PointTag {
        self.tags[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn extend(&mut self, other: &PointCloud) {
        debug_assert_eq!(self.dim, other.dim);
        self.coords.extend_from_slice(&other.coords);
        self.tags.extend_from_slice(&other.tags);
    }

    pub fn retain_tag(&self, tag: PointTag) -> PointCloud {
        let mut out = PointCloud::new(self.dim);
        for i in 0..self.len() {
            if self.tags[i] == tag {
                out.push(self.point(i), tag);
            }
        }
        out
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Uniform hash grid over a point cloud; cell edge length `cell`.
pub struct HashGrid<'a> {
    cloud: &'a PointCloud,
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> HashGrid<'a> {
    pub fn build(cloud: &'a PointCloud, cell: f64) -> Self {
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for i in 0..cloud.len() {
            let key = Self::key_of(cloud.point(i), cell);
            buckets.entry(key).or_default().push(i);
        }
        HashGrid { cloud, cell, buckets }
    }

    fn key_of(p: &[f64], cell: f64) -> Vec<i64> {
        p.iter().map(|&x| (x / cell).floor() as i64).collect()
    }

    /// Indices of all points within `r` of `q`, unordered.
    pub fn within(&self, q: &[f64], r: f64) -> Vec<usize> {
        let dim = self.cloud.dim();
        let lo: Vec<i64> = (0..dim)
            .map(|a| ((q[a] - r) / self.cell).floor() as i64)
            .collect();
        let hi: Vec<i64> = (0..dim)
            .map(|a| ((q[a] + r) / self.cell).floor() as i64)
            .collect();
        let mut out = Vec::new();
        let mut key = lo.clone();
        loop {
            if let Some(bucket) = self.buckets.get(&key) {
                for &i in bucket {
                    if dist(self.cloud.point(i), q) <= r {
                        out.push(i);
                    }
                }
            }
            // advance the multi-index key over [lo, hi]
            let mut a = dim;
            loop {
                if a == 0 {
                    return out;
                }
                a -= 1;
                if key[a] < hi[a] {
                    key[a] += 1;
                    for (b, item) in key.iter_mut().enumerate().skip(a + 1) {
                        *item = lo[b];
                    }
                    break;
                }
            }
        }
    }

    /// Nearest cloud point to `q` by expanding ring search.
    pub fn nearest(&self, q: &[f64]) -> Result<(usize, f64)> {
        if self.cloud.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut r = self.cell;
        loop {
            let cand = self.within(q, r);
            let best = cand
                .into_iter()
                .map(|i| (i, dist(self.cloud.point(i), q)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((i, d)) = best {
                if d <= r {
                    return Ok((i, d));
                }
            }
            r *= 2.0;
            if r > 64.0 {
                // brute force fallback; the domain is a unit box so this
                // only triggers for far-away queries
                let (i, d) = (0..self.cloud.len())
                    .map(|i| (i, dist(self.cloud.point(i), q)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                return Ok((i, d));
            }
        }
    }
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff_points(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "clouds live in dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(directed_points(a, b)?.max(directed_points(b, a)?))
}

fn directed_points(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    let cell = guess_cell(b);
    let grid = HashGrid::build(b, cell);
    let mut worst = 0.0f64;
    for p in a.iter() {
        let (_, d) = grid.nearest(p)?;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Fill distance of a cloud X relative to reference points on the target
/// set: 2 * sup over the reference points of the distance to X. The factor
/// two absorbs the gap between the reference discretization and the
/// continuous set it stands for.
pub fn fill_distance(cloud: &PointCloud, reference: &PointCloud) -> Result<f64> {
    if cloud.is_empty() || reference.is_empty() {
        return Err(Error::EmptySet);
    }
    let cell = guess_cell(cloud);
    let grid = HashGrid::build(cloud, cell);
    let mut worst = 0.0f64;
    for q in reference.iter() {
        let (_, d) = grid.nearest(q)?;
        worst = worst.max(d);
    }
    Ok(2.0 * worst)
}

fn guess_cell(c: &PointCloud) -> f64 {
    // aim for O(1) points per cell on a set of codimension one
    let n = c.len().max(1) as f64;
    let k = (c.dim().max(2) - 1) as f64;
    (1.0 / n.powf(1.0 / k)).clamp(1e-3, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud_of(points: &[&[f64]]) -> PointCloud {
        let mut c = PointCloud::new(points[0].len());
        for p in points {
            c.push(p, PointTag::SampleBoundary);
        }
        c
    }

    #[test]
    fn hausdorff_matches_brute_force() {
        let a = cloud_of(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, 0.5]]);
        let b = cloud_of(&[&[0.0, 0.1], &[1.0, -0.2], &[0.4, 0.6]]);
        let mut brute = 0.0f64;
        for p in a.iter() {
            let d = b.iter().map(|q| dist(p, q)).fold(f64::MAX, f64::min);
            brute = brute.max(d);
        }
        for q in b.iter() {
            let d = a.iter().map(|p| dist(p, q)).fold(f64::MAX, f64::min);
            brute = brute.max(d);
        }
        let got = hausdorff_points(&a, &b).unwrap();
        assert!((got - brute).abs() < 1e-12);
    }

    #[test]
    fn identical_clouds_at_zero() {
        let a = cloud_of(&[&[0.2, 0.3, 0.4], &[0.8, 0.1, 0.9]]);
        assert_eq!(hausdorff_points(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn empty_cloud_is_an_error() {
        let a = cloud_of(&[&[0.0, 0.0]]);
        let b = PointCloud::new(2);
        assert!(matches!(hausdorff_points(&a, &b), Err(Error::EmptySet)));
    }

    #[test]
    fn within_finds_all_neighbors() {
        let mut c = PointCloud::new(2);
        for i in 0..20 {
            for j in 0..20 {
                c.push(&[i as f64 / 19.0, j as f64 / 19.0], PointTag::SampleBoundary);
            }
        }
        let grid = HashGrid::build(&c, 0.07);
        let q = [0.5, 0.5];
        let r = 0.13;
        let mut expect: Vec<usize> = (0..c.len()).filter(|&i| dist(c.point(i), &q) <= r).collect();
        let mut got = grid.within(&q, r);
        expect.sort_unstable();
        got.sort_unstable();
        assert_eq!(expect, got);
    }

    #[test]
    fn fill_distance_of_regular_grid() {
        let mut x = PointCloud::new(2);
        let n = 11;
        for i in 0..n {
            x.push(&[i as f64 / (n - 1) as f64, 0.0], PointTag::SampleBoundary);
        }
        let mut dense = PointCloud::new(2);
        for i in 0..1001 {
            dense.push(&[i as f64 / 1000.0, 0.0], PointTag::SampleBoundary);
        }
        let fd = fill_distance(&x, &dense).unwrap();
        // worst reference point sits mid-gap: distance 0.05, doubled
        assert!((fd - 0.1).abs() < 2e-3, "fd = {fd}");
    }
}
