pub mod cloud;
pub mod grid;
pub mod interval;
pub mod sampled;

pub use cloud::{dist, fill_distance, hausdorff_points, HashGrid, PointCloud, PointTag};
pub use grid::GridSet;
pub use interval::{hausdorff_1d, IntervalUnion, MERGE_TOL, ROOT_TOL};
pub use sampled::{Hole, Pct, PctKind, SampleSet, SampledSVF};
