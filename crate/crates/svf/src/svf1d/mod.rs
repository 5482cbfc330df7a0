//! Reconstruction of interval-valued functions on [0,1] from equidistant
//! samples.
//!
//! The boundary of the graph is traced through the samples, topology
//! changes (components or holes appearing and disappearing) are located by
//! local polynomial models, and everything else is interpolated by cubic
//! splines. The resulting approximant converges in the Hausdorff metric at
//! the order of its ingredients: four away from topology changes, k/2 at a
//! fold, four at a transversal crossing.

mod assemble;
mod approximant;
mod interp;
mod pct;

pub use assemble::{
    assemble, detect_boundary_points, detect_topology_strips, Assembly, EndMarker, EventKind,
    RawCurve, StripEvent,
};
pub use approximant::{
    build_approximant, BoundaryCurve, PctSite, SVF1DApproximant, UnreliableStrip,
    BLEND_HALF_WIDTH_STEPS,
};
pub use interp::Interp1D;
pub use pct::{
    approx_pct_case_a, approx_pct_case_b, classify_pct, Poly, PctModel, CLASSIFY_THETA,
    CROSSING_FIT_DEGREE,
};

use crate::error::Result;
use crate::geom::sampled::SampledSVF;

/// Default fold model order: degree-5 rotated polynomials through 6 samples.
pub const DEFAULT_K: usize = 3;

/// Default boundary spline degree (not-a-knot cubic).
pub const DEFAULT_SPLINE_DEGREE: usize = 3;

/// Complement every sample within [0,1]. Processing the complement instead
/// of the samples turns holes into components and back, which resolves
/// topology changes where a boundary only touches.
pub fn complement(svf: &SampledSVF) -> Result<SampledSVF> {
    svf.complement()
}
