use super::space::{SplineCoefficients, TensorSplineSpace};
use crate::linalg::{solve_sparse, TripletBuilder};
use crate::quadrature::QuadRule;
use crate::Result;

/// Global L² projection of `f` onto the space over the untrimmed unit square.
pub fn l2_project_global(
    space: &TensorSplineSpace,
    f: impl Fn([f64; 2]) -> f64,
    quad_order: usize,
) -> Result<SplineCoefficients> {
    let n = space.dim();
    let mut mass = TripletBuilder::new(n);
    let mut rhs = vec![0.0; n];
    for cell in 0..space.num_cells() {
        let rule = QuadRule::tensor_box(quad_order, space.cell_bounds(cell));
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let cb = space.eval_cell(cell, *x);
            let fx = f(*x);
            for (a, &i) in cb.dofs.iter().enumerate() {
                rhs[i] += w * fx * cb.values[a];
                for (b, &j) in cb.dofs.iter().enumerate() {
                    mass.add(i, j, w * cb.values[a] * cb.values[b]);
                }
            }
        }
    }
    solve_sparse(&mass.build(), &rhs)
}
