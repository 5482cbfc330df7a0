pub mod bspline;
pub mod coeffs;
pub mod marching;
pub mod tensor;

pub use bspline::{bspline_deriv, bspline_eval, MAX_DEGREE};
pub use coeffs::{qi_coeffs, qi_coeffs_exact, QIOperator};
pub use marching::{
    extract_contours, extract_surface, zero_level_extract, LevelSet, TriangleMesh,
};
pub use tensor::{qi_apply_tensor, TensorSpline};
