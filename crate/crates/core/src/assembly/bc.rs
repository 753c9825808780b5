use faer::linalg::solvers::Solve;
use faer::Mat;

use super::system::{LinearSystem, ScalarField};
use crate::geometry::GeometryMap;
use crate::linalg::TripletBuilder;
use crate::spline::TensorSplineSpace;
use crate::trimming::{Side, TrimmedMesh};
use crate::{Error, Result};

/// Relative active-support threshold used by assembly.
pub const DEACTIVATION_TOL: f64 = 1e-14;

/// A DOF is active when the parametric area of `Ω̂` inside its support is at
/// least `tol` times the support area.
pub fn deactivate_dofs(space: &TensorSplineSpace, tm: &TrimmedMesh, tol: f64) -> Vec<bool> {
    (0..space.dim())
        .map(|dof| {
            let [rx, ry] = space.support_cells(dof);
            let mut active = 0.0;
            let mut total = 0.0;
            for j in ry.clone() {
                for i in rx.clone() {
                    let c = space.cell_id(i, j);
                    let b = tm.cell(c).bounds;
                    total += (b[0][1] - b[0][0]) * (b[1][1] - b[1][0]);
                    active += tm.cell(c).rule.total_weight();
                }
            }
            active >= tol * total && active > 0.0
        })
        .collect()
}

/// Coefficients of the edge spline collocating `g_D ∘ F` at the Greville
/// abscissae of one side, indexed along the side.
pub fn edge_interpolant(
    space: &TensorSplineSpace,
    map: &GeometryMap,
    g_d: &ScalarField,
    side: Side,
) -> Result<Vec<f64>> {
    let (axis, val) = side.fixed();
    let along = 1 - axis;
    let kv = space.knot_vector(along);
    let gr = kv.greville();
    let n = gr.len();
    let mut c = Mat::<f64>::zeros(n, n);
    let mut rhs = Mat::<f64>::zeros(n, 1);
    for (k, &t) in gr.iter().enumerate() {
        let be = kv.eval_basis(t, 0)?;
        for (a, v) in be.values().iter().enumerate() {
            c[(k, be.first + a)] = *v;
        }
        let mut xi = [0.0; 2];
        xi[axis] = val;
        xi[along] = t;
        rhs[(k, 0)] = g_d(map.map_eval(xi)?.point);
    }
    let x = c.partial_piv_lu().solve(&rhs);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "edge collocation failed on {side:?}"
        )));
    }
    Ok(out)
}

/// Constrains the DOFs of the given fitted sides to the Greville
/// interpolant of `g_D` and eliminates them symmetrically. Only DOFs whose
/// edge support meets the active part of the side are constrained.
pub fn apply_strong_bc(
    mut system: LinearSystem,
    space: &TensorSplineSpace,
    map: &GeometryMap,
    tm: &TrimmedMesh,
    g_d: &ScalarField,
    sides: &[Side],
) -> Result<LinearSystem> {
    let n = system.dim();
    let mut value: Vec<Option<f64>> = vec![None; n];
    for &(d, v) in &system.constraints {
        value[d] = Some(v);
    }
    let [n1, n2] = space.dims();
    for &side in sides {
        let coeffs = edge_interpolant(space, map, g_d, side)?;
        let (axis, val) = side.fixed();
        let along = 1 - axis;
        let kv = space.knot_vector(along);
        let fixed_idx = if val == 0.0 {
            0
        } else if axis == 0 {
            n1 - 1
        } else {
            n2 - 1
        };
        for (k, &cv) in coeffs.iter().enumerate() {
            let (lo, hi) = kv.support(k);
            let touches = tm
                .side_intervals(side)
                .iter()
                .any(|&(a, b)| hi.min(b) - lo.max(a) > 1e-14);
            let dof = if axis == 0 {
                space.dof_index(fixed_idx, k)
            } else {
                space.dof_index(k, fixed_idx)
            };
            if touches && system.active[dof] && value[dof].is_none() {
                value[dof] = Some(cv);
            }
        }
    }
    let mut t = TripletBuilder::new(n);
    let mut rhs = system.rhs.clone();
    for (i, j, a) in system.matrix.iter() {
        match (value[i], value[j]) {
            (None, None) => t.add(i, j, a),
            (None, Some(g)) => rhs[i] -= a * g,
            _ => {}
        }
    }
    for (i, v) in value.iter().enumerate() {
        if let Some(g) = v {
            t.add(i, i, 1.0);
            rhs[i] = *g;
        }
    }
    system.matrix = t.build();
    system.rhs = rhs;
    system.constraints = value
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|g| (i, g)))
        .collect();
    Ok(system)
}
