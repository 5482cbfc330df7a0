//! Approximation of continuous set-valued functions from equidistant
//! samples.
//!
//! A set-valued function F maps [0,1] to compact subsets of [0,1]^d. Given
//! only the sampled sets F(0), F(h), ..., F(1) this crate reconstructs F
//! with high order, including at the isolated points where the topology of
//! F(t) changes (components merging, splitting, appearing or vanishing).
//! The reconstruction treats the graph of F as a (d+1)-dimensional set and
//! combines:
//!
//! - an interval-exact one-dimensional algorithm with local models at
//!   topology changes (crossing and fold points),
//! - tensor-product B-spline quasi-interpolation of implicit grids,
//! - moving least-squares projection onto point clouds sampled from the
//!   graph boundary, yielding a signed distance representation,
//! - the metric average for set interpolation between two sampled sets.

pub mod convergence;
pub mod distance;
pub mod error;
pub mod geom;
pub mod io;
pub mod metric_average;
pub mod phantoms;
pub mod quasi;
pub mod reconstruct;
pub mod svf1d;

pub use error::{Error, Result};
