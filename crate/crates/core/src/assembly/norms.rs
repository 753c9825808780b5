use super::system::WeakBoundary;
use crate::geometry::GeometryMap;
use crate::spline::TensorSplineSpace;
use crate::trimming::TrimmedMesh;
use crate::Result;

/// `(‖u − u_h‖_{1,h,Ω}, ‖u − u_h‖_{L²(Ω)})` with the boundary part taken
/// over the weak Dirichlet frames.
pub fn error_norms(
    space: &TensorSplineSpace,
    tm: &TrimmedMesh,
    map: &GeometryMap,
    coeffs: &[f64],
    u: &(dyn Fn([f64; 2]) -> f64 + Sync),
    grad_u: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync),
    weak: WeakBoundary,
) -> Result<(f64, f64)> {
    let mut grad2 = 0.0;
    let mut l2 = 0.0;
    let mut bnd = 0.0;
    for cell in 0..space.num_cells() {
        let cd = tm.cell(cell);
        if !cd.label.is_active() {
            continue;
        }
        let b = cd.bounds;
        let anchor = [0.5 * (b[0][0] + b[0][1]), 0.5 * (b[1][0] + b[1][1])];
        for (xi, w) in cd.rule.points.iter().zip(&cd.rule.weights) {
            let me = map.eval_anchored(*xi, anchor)?;
            let (v, g) = space.eval_in_cell(coeffs, cell, *xi);
            let pg = me.push_gradient(g);
            let ge = grad_u(me.point);
            let ww = w * me.det.abs();
            grad2 += ww * ((ge[0] - pg[0]).powi(2) + (ge[1] - pg[1]).powi(2));
            l2 += ww * (u(me.point) - v).powi(2);
        }
        for f in weak.frames(tm, cell) {
            let (v, _) = space.eval_in_cell(coeffs, cell, f.xi);
            bnd += f.frame.weight / cd.h * (u(f.frame.point) - v).powi(2);
        }
    }
    Ok(((grad2 + bnd).sqrt(), l2.sqrt()))
}
