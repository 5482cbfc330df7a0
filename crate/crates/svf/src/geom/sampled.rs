//! Equidistant samples of a set-valued function on [0,1].

use crate::error::{Error, Result};
use crate::geom::grid::GridSet;
use crate::geom::interval::IntervalUnion;

/// One sampled set value: a union of intervals for subsets of [0,1], or an
/// implicit grid for subsets of [0,1]^d with d >= 2.
#[derive(Debug, Clone)]
pub enum SampleSet {
    Intervals(IntervalUnion),
    Grid(GridSet),
}

impl SampleSet {
    pub fn dim(&self) -> usize {
        match self {
            SampleSet::Intervals(_) => 1,
            SampleSet::Grid(g) => g.dim(),
        }
    }

    pub fn as_intervals(&self) -> Result<&IntervalUnion> {
        match self {
            SampleSet::Intervals(iu) => Ok(iu),
            SampleSet::Grid(g) => Err(Error::DimensionUnsupported(g.dim())),
        }
    }

    pub fn as_grid(&self) -> Result<&GridSet> {
        match self {
            SampleSet::Grid(g) => Ok(g),
            SampleSet::Intervals(_) => Err(Error::DimensionUnsupported(1)),
        }
    }
}

/// Samples F(0), F(h), ..., F(1) of a set-valued function at spacing
/// h = 1/n_intervals.
#[derive(Debug, Clone)]
pub struct SampledSVF {
    dim: usize,
    samples: Vec<SampleSet>,
}

impl SampledSVF {
    pub fn new(samples: Vec<SampleSet>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need samples at both endpoints of [0,1], got {}",
                samples.len()
            )));
        }
        let dim = samples[0].dim();
        for s in &samples[1..] {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "samples mix set dimensions {} and {}",
                    dim,
                    s.dim()
                )));
            }
        }
        Ok(SampledSVF { dim, samples })
    }

    /// Dimension of the set values (the graph lives in dimension dim + 1).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_intervals() as f64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn sample(&self, i: usize) -> &SampleSet {
        &self.samples[i]
    }

    pub fn samples(&self) -> &[SampleSet] {
        &self.samples
    }

    pub fn intervals_at(&self, i: usize) -> Result<&IntervalUnion> {
        self.samples[i].as_intervals()
    }

    /// Complement each interval-valued sample within [0,1].
    pub fn complement(&self) -> Result<SampledSVF> {
        let mut out = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            out.push(SampleSet::Intervals(s.as_intervals()?.complement(0.0, 1.0)));
        }
        SampledSVF::new(out)
    }
}

/// Point where the number of connected components of F(t) changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pct {
    pub t: f64,
    pub y: f64,
    pub kind: PctKind,
}

/// How boundary curves behave at a topology change: two smooth curves
/// crossing transversally, or a single curve folding back with a vertical
/// tangent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PctKind {
    Crossing,
    Fold,
}

/// A hole of the graph over the parameter strip (start, end): for interior
/// sample points the set has a gap between `lower` and `upper`.
#[derive(Debug, Clone)]
pub struct Hole {
    pub start: f64,
    pub end: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}
