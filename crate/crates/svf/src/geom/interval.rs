//! Finite unions of disjoint closed intervals: the 1D compact sets the
//! whole pipeline bottoms out in, together with an exact Hausdorff metric.

use crate::error::{Error, Result};

/// Intervals closer than this are fused during normalization so that
/// floating-point noise cannot open spurious holes.
pub const MERGE_TOL: f64 = 1e-9;

/// Root refinement tolerance, in coordinate units.
pub const ROOT_TOL: f64 = 1e-12;

/// A compact subset of the line stored as sorted, pairwise disjoint closed
/// intervals. The empty set is a first-class value (empty interval list).
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion { intervals: Vec::new() }
    }

    /// Build from arbitrary (lo, hi) pairs; sorts, drops inverted pairs and
    /// fuses intervals whose gap is below [`MERGE_TOL`].
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut iv: Vec<(f64, f64)> = pairs
            .into_iter()
            .filter(|&(lo, hi)| hi >= lo && lo.is_finite() && hi.is_finite())
            .collect();
        iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (lo, hi) in iv {
            match merged.last_mut() {
                Some(last) if lo - last.1 <= MERGE_TOL => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        IntervalUnion { intervals: merged }
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        Self::new([(lo, hi)])
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    /// Sorted boundary values; even positions are lower endpoints, odd are
    /// upper ones.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut e = Vec::with_capacity(2 * self.intervals.len());
        for &(lo, hi) in &self.intervals {
            e.push(lo);
            e.push(hi);
        }
        e
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    /// Distance from `x` to the set (0 when inside).
    pub fn distance_to(&self, x: f64) -> f64 {
        let mut best = f64::INFINITY;
        for &(lo, hi) in &self.intervals {
            let d = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            best = best.min(d);
            if best == 0.0 {
                break;
            }
        }
        best
    }

    /// Signed distance along the line: positive inside the set, negative
    /// outside, zero on the boundary.
    pub fn signed_distance(&self, x: f64) -> f64 {
        if self.is_empty() {
            return f64::NEG_INFINITY;
        }
        for &(lo, hi) in &self.intervals {
            if lo <= x && x <= hi {
                return (x - lo).min(hi - x);
            }
        }
        -self.distance_to(x)
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut best = (f64::INFINITY, x);
        for &(lo, hi) in &self.intervals {
            let p = x.clamp(lo, hi);
            let d = (x - p).abs();
            if d < best.0 {
                best = (d, p);
            }
        }
        Ok(best.1)
    }

    /// Complement within `[lo, hi]`.
    pub fn complement(&self, lo: f64, hi: f64) -> IntervalUnion {
        let mut out = Vec::new();
        let mut cursor = lo;
        for &(a, b) in &self.intervals {
            if a > cursor {
                out.push((cursor, a.min(hi)));
            }
            cursor = cursor.max(b);
            if cursor >= hi {
                break;
            }
        }
        if cursor < hi {
            out.push((cursor, hi));
        }
        IntervalUnion::new(out)
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|&(lo, hi)| hi - lo).sum()
    }

    pub fn min(&self) -> Option<f64> {
        self.intervals.first().map(|&(lo, _)| lo)
    }

    pub fn max(&self) -> Option<f64> {
        self.intervals.last().map(|&(_, hi)| hi)
    }
}

/// Exact Hausdorff distance between two non-empty interval unions.
///
/// The directed distance sup_{a in A} dist(a, B) is attained either at an
/// endpoint of A or at a gap midpoint of B that lies inside A, so the
/// maximum is taken over those finitely many candidates; no discretization
/// is involved.
pub fn hausdorff_1d(a: &IntervalUnion, b: &IntervalUnion) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(directed_1d(a, b).max(directed_1d(b, a)))
}

fn directed_1d(a: &IntervalUnion, b: &IntervalUnion) -> f64 {
    let mut worst: f64 = 0.0;
    for &(lo, hi) in a.intervals() {
        worst = worst.max(b.distance_to(lo)).max(b.distance_to(hi));
    }
    let bi = b.intervals();
    for w in bi.windows(2) {
        let mid = 0.5 * (w[0].1 + w[1].0);
        if a.contains(mid) {
            worst = worst.max(b.distance_to(mid));
        }
    }
    worst
}
