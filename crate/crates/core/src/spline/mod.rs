//! Univariate and tensor-product B-spline spaces.

mod bernstein;
mod knot_vector;
mod projection;
mod space;

pub use bernstein::{bernstein_ders, binomial};
pub use knot_vector::{
    insert_knot, insert_knot_points, make_open_knot_vector, BasisEval, KnotVector,
};
pub use projection::l2_project_global;
pub use space::{
    bezier_extract, CellBasis, CellId, ExtractionOperator, SplineCoefficients, TensorSplineSpace,
};
