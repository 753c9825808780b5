use std::sync::Arc;

use rayon::prelude::*;

use crate::geometry::GeometryMap;
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::spline::TensorSplineSpace;
use crate::stabilization::StabilizationPlan;
use crate::trimming::{Side, TrimFrame, TrimmedMesh};
use crate::{Error, Result};

pub type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
/// Neumann datum as a function of the physical point and outward normal.
pub type FluxField = Arc<dyn Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    WeakDirichlet,
    StrongDirichlet,
    Neumann,
}

#[derive(Clone)]
pub struct ProblemData {
    pub f: ScalarField,
    pub g_d: ScalarField,
    pub g_n: FluxField,
    /// Indexed like [`Side::ALL`].
    pub sides: [BcKind; 4],
    pub trim: BcKind,
    pub beta: f64,
}

impl ProblemData {
    /// Zero data with the given boundary assignment.
    pub fn homogeneous(sides: [BcKind; 4], trim: BcKind, beta: f64) -> Self {
        Self {
            f: Arc::new(|_| 0.0),
            g_d: Arc::new(|_| 0.0),
            g_n: Arc::new(|_, _| 0.0),
            sides,
            trim,
            beta,
        }
    }

    pub fn side(&self, s: Side) -> BcKind {
        self.sides[s as usize]
    }

    pub fn weak_boundary(&self) -> WeakBoundary {
        WeakBoundary {
            trim: self.trim == BcKind::WeakDirichlet,
            sides: self.sides.map(|k| k == BcKind::WeakDirichlet),
        }
    }

    pub fn strong_sides(&self) -> Vec<Side> {
        Side::ALL
            .into_iter()
            .filter(|&s| self.side(s) == BcKind::StrongDirichlet)
            .collect()
    }
}

/// Which boundary parts carry the weak Dirichlet (and `h⁻¹`) terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeakBoundary {
    pub trim: bool,
    pub sides: [bool; 4],
}

impl WeakBoundary {
    pub const TRIM_ONLY: Self = Self {
        trim: true,
        sides: [false; 4],
    };

    /// Weak frames of a cell.
    pub fn frames<'a>(
        &self,
        tm: &'a TrimmedMesh,
        cell: usize,
    ) -> impl Iterator<Item = &'a TrimFrame> + 'a {
        let data = tm.cell(cell);
        let trim = self.trim;
        let sides = self.sides;
        data.trim_frames.iter().filter(move |_| trim).chain(
            data.side_frames
                .iter()
                .filter(move |(s, _)| sides[*s as usize])
                .map(|(_, f)| f),
        )
    }
}

/// Symmetric sparse system with activity mask and strong constraints.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub active: Vec<bool>,
    /// `(dof, value)` pairs, sorted by dof.
    pub constraints: Vec<(usize, f64)>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Active DOFs that are not strongly constrained.
    pub fn free_dofs(&self) -> Vec<usize> {
        let mut constrained = vec![false; self.dim()];
        for &(d, _) in &self.constraints {
            constrained[d] = true;
        }
        (0..self.dim())
            .filter(|&i| self.active[i] && !constrained[i])
            .collect()
    }
}

struct CellContribution {
    entries: Vec<(usize, usize, f64)>,
    rhs: Vec<(usize, f64)>,
}

fn anchor(b: [[f64; 2]; 2]) -> [f64; 2] {
    [0.5 * (b[0][0] + b[0][1]), 0.5 * (b[1][0] + b[1][1])]
}

/// Basis values and physical normal derivatives of a cell's own functions at a frame.
fn plain_trace(
    space: &TensorSplineSpace,
    map: &GeometryMap,
    cell: usize,
    f: &TrimFrame,
) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>)> {
    let me = map.eval_anchored(f.xi, anchor(space.cell_bounds(cell)))?;
    let cb = space.eval_cell(cell, f.xi);
    let n = f.frame.normal;
    let dn = cb
        .grads
        .iter()
        .map(|g| {
            let p = me.push_gradient(*g);
            p[0] * n[0] + p[1] * n[1]
        })
        .collect();
    Ok((cb.dofs, cb.values, dn))
}

#[allow(clippy::too_many_arguments)]
fn nitsche_frame(
    out: &mut CellContribution,
    dofs: &[usize],
    vals: &[f64],
    rdofs: &[usize],
    rvals: &[f64],
    w: f64,
    h: f64,
    beta: f64,
    g: f64,
) {
    for (a, &i) in dofs.iter().enumerate() {
        for (b, &j) in rdofs.iter().enumerate() {
            let v = -w * vals[a] * rvals[b];
            out.entries.push((i, j, v));
            out.entries.push((j, i, v));
        }
        for (b, &j) in dofs.iter().enumerate() {
            out.entries.push((i, j, w * beta / h * vals[a] * vals[b]));
        }
        out.rhs.push((i, w * beta / h * g * vals[a]));
    }
    for (b, &j) in rdofs.iter().enumerate() {
        out.rhs.push((j, -w * g * rvals[b]));
    }
}

/// Assembles the (stabilized) Nitsche system. DOFs deactivated by
/// [`super::deactivate_dofs`] get identity rows; strong conditions are
/// applied separately by [`super::apply_strong_bc`].
pub fn assemble(
    space: &TensorSplineSpace,
    tm: &TrimmedMesh,
    map: &GeometryMap,
    plan: &StabilizationPlan,
    data: &ProblemData,
) -> Result<LinearSystem> {
    if !(data.beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "penalty beta = {} must be positive",
            data.beta
        )));
    }
    let n = space.dim();
    let contribs: Vec<CellContribution> = (0..space.num_cells())
        .into_par_iter()
        .map(|cell| -> Result<CellContribution> {
            let cd = tm.cell(cell);
            let mut out = CellContribution {
                entries: Vec::new(),
                rhs: Vec::new(),
            };
            if !cd.label.is_active() {
                return Ok(out);
            }
            let anc = anchor(cd.bounds);
            for (xi, w) in cd.rule.points.iter().zip(&cd.rule.weights) {
                let me = map.eval_anchored(*xi, anc)?;
                let cb = space.eval_cell(cell, *xi);
                let ww = w * me.det.abs();
                let g: Vec<[f64; 2]> = cb.grads.iter().map(|g| me.push_gradient(*g)).collect();
                let fx = (data.f)(me.point);
                for (a, &i) in cb.dofs.iter().enumerate() {
                    for (b, &j) in cb.dofs.iter().enumerate() {
                        out.entries
                            .push((i, j, ww * (g[a][0] * g[b][0] + g[a][1] * g[b][1])));
                    }
                    out.rhs.push((i, ww * fx * cb.values[a]));
                }
            }
            for f in &cd.trim_frames {
                match data.trim {
                    BcKind::WeakDirichlet => {
                        let r = plan.flux_row(space, map, cell, f)?;
                        let cb = space.eval_cell(cell, f.xi);
                        let g = (data.g_d)(f.frame.point);
                        nitsche_frame(
                            &mut out,
                            &cb.dofs,
                            &cb.values,
                            &r.dofs,
                            &r.values,
                            f.frame.weight,
                            cd.h,
                            data.beta,
                            g,
                        );
                    }
                    BcKind::Neumann => {
                        let cb = space.eval_cell(cell, f.xi);
                        let g = (data.g_n)(f.frame.point, f.frame.normal);
                        for (a, &i) in cb.dofs.iter().enumerate() {
                            out.rhs.push((i, f.frame.weight * g * cb.values[a]));
                        }
                    }
                    BcKind::StrongDirichlet => {
                        return Err(Error::InvalidArgument(
                            "strong conditions on the trimmed boundary are unsupported".into(),
                        ))
                    }
                }
            }
            for (side, f) in &cd.side_frames {
                match data.side(*side) {
                    BcKind::WeakDirichlet => {
                        let (dofs, vals, dn) = plain_trace(space, map, cell, f)?;
                        let g = (data.g_d)(f.frame.point);
                        nitsche_frame(
                            &mut out,
                            &dofs,
                            &vals,
                            &dofs,
                            &dn,
                            f.frame.weight,
                            cd.h,
                            data.beta,
                            g,
                        );
                    }
                    BcKind::Neumann => {
                        let cb = space.eval_cell(cell, f.xi);
                        let g = (data.g_n)(f.frame.point, f.frame.normal);
                        for (a, &i) in cb.dofs.iter().enumerate() {
                            out.rhs.push((i, f.frame.weight * g * cb.values[a]));
                        }
                    }
                    BcKind::StrongDirichlet => {}
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let active = super::deactivate_dofs(space, tm, super::DEACTIVATION_TOL);
    let mut t = TripletBuilder::new(n);
    let mut rhs = vec![0.0; n];
    for c in &contribs {
        for &(i, j, v) in &c.entries {
            if active[i] && active[j] {
                t.add(i, j, v);
            }
        }
        for &(i, v) in &c.rhs {
            if active[i] {
                rhs[i] += v;
            }
        }
    }
    for (i, &a) in active.iter().enumerate() {
        if !a {
            t.add(i, i, 1.0);
        }
    }
    Ok(LinearSystem {
        matrix: t.build(),
        rhs,
        active,
        constraints: Vec::new(),
    })
}

/// `∫_Ω ∇u·∇v + Σ_{weak} h⁻¹ ∫ u v`, identity on inactive DOFs.
pub fn gram_1h(
    space: &TensorSplineSpace,
    tm: &TrimmedMesh,
    map: &GeometryMap,
    weak: WeakBoundary,
) -> Result<CsrMatrix> {
    let n = space.dim();
    let contribs: Vec<Vec<(usize, usize, f64)>> = (0..space.num_cells())
        .into_par_iter()
        .map(|cell| -> Result<Vec<(usize, usize, f64)>> {
            let cd = tm.cell(cell);
            let mut out = Vec::new();
            if !cd.label.is_active() {
                return Ok(out);
            }
            let anc = anchor(cd.bounds);
            for (xi, w) in cd.rule.points.iter().zip(&cd.rule.weights) {
                let me = map.eval_anchored(*xi, anc)?;
                let cb = space.eval_cell(cell, *xi);
                let ww = w * me.det.abs();
                let g: Vec<[f64; 2]> = cb.grads.iter().map(|g| me.push_gradient(*g)).collect();
                for (a, &i) in cb.dofs.iter().enumerate() {
                    for (b, &j) in cb.dofs.iter().enumerate() {
                        out.push((i, j, ww * (g[a][0] * g[b][0] + g[a][1] * g[b][1])));
                    }
                }
            }
            for f in weak.frames(tm, cell) {
                let cb = space.eval_cell(cell, f.xi);
                let s = f.frame.weight / cd.h;
                for (a, &i) in cb.dofs.iter().enumerate() {
                    for (b, &j) in cb.dofs.iter().enumerate() {
                        out.push((i, j, s * cb.values[a] * cb.values[b]));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let active = super::deactivate_dofs(space, tm, super::DEACTIVATION_TOL);
    let mut t = TripletBuilder::new(n);
    for c in &contribs {
        for &(i, j, v) in c {
            if active[i] && active[j] {
                t.add(i, j, v);
            }
        }
    }
    for (i, &a) in active.iter().enumerate() {
        if !a {
            t.add(i, i, 1.0);
        }
    }
    Ok(t.build())
}
