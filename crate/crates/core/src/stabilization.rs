//! Flux operators `R_K` replacing `∂v/∂n` on cut cells.
//!
//! Good cells use the plain normal derivative. A bad cell `K` borrows the
//! polynomial of its good neighbor `K′`, continued to `K` either in the
//! parametric domain (Bernstein form of the spline on `Q′`) or in the
//! physical domain (L² projection onto `Q_p(K′)` in physical coordinates).

use std::str::FromStr;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side as FaerSide};
use rayon::prelude::*;

use crate::geometry::GeometryMap;
use crate::linalg::gen_eigenvalues;
use crate::quadrature::{legendre_table, QuadRule};
use crate::spline::{CellId, ExtractionOperator, TensorSplineSpace};
use crate::trimming::{CellLabel, TrimFrame, TrimmedMesh};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabMode {
    None,
    Parametric,
    Physical,
}

impl FromStr for StabMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "parametric" => Ok(Self::Parametric),
            "physical" => Ok(Self::Physical),
            _ => Err(Error::Config(format!("unknown stabilization mode '{s}'"))),
        }
    }
}

impl StabMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Parametric => "parametric",
            Self::Physical => "physical",
        }
    }
}

/// Local operator of one cut cell.
#[derive(Debug, Clone)]
pub enum FluxOperator {
    /// `∂v/∂n` of the cell's own polynomial.
    Plain,
    /// Bernstein extension from the neighbor's parametric cell.
    Parametric(ExtractionOperator),
    /// Physical polynomial `Σ_m α[m][l] L_m` per local basis function `l`
    /// of the neighbor, with `L_m` tensor Legendre on `bbox`.
    Physical {
        bbox: [[f64; 2]; 2],
        alpha: Mat<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct FluxEntry {
    /// Cell whose local functions the operator acts on (`K′`, or `K` itself).
    pub source: CellId,
    pub op: FluxOperator,
}

#[derive(Debug, Clone)]
pub struct StabilizationPlan {
    mode: StabMode,
    theta: f64,
    entries: Vec<Option<FluxEntry>>,
}

/// Flux values of the source cell's local basis at one frame.
#[derive(Debug, Clone)]
pub struct FluxRow {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

impl StabilizationPlan {
    pub fn build(
        space: &TensorSplineSpace,
        map: &GeometryMap,
        tm: &TrimmedMesh,
        mode: StabMode,
        quad_order: usize,
    ) -> Result<Self> {
        let cut: Vec<CellId> = tm.cut_cells().collect();
        let built: Vec<(CellId, FluxEntry)> = cut
            .par_iter()
            .map(|&k| -> Result<(CellId, FluxEntry)> {
                let entry = match (mode, tm.label(k)) {
                    (StabMode::None, _) | (_, CellLabel::CutGood) => FluxEntry {
                        source: k,
                        op: FluxOperator::Plain,
                    },
                    (_, _) => {
                        let kp = tm.neighbor(k).ok_or(Error::NoGoodNeighbor { cell: k })?;
                        let op = if mode == StabMode::Parametric {
                            parametric_flux_operator(space, kp)
                        } else {
                            physical_flux_operator(space, map, kp, quad_order)?
                        };
                        FluxEntry { source: kp, op }
                    }
                };
                Ok((k, entry))
            })
            .collect::<Result<_>>()?;
        let mut entries = vec![None; tm.num_cells()];
        for (k, e) in built {
            entries[k] = Some(e);
        }
        Ok(Self {
            mode,
            theta: tm.theta(),
            entries,
        })
    }

    pub fn mode(&self) -> StabMode {
        self.mode
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn entry(&self, cell: CellId) -> Option<&FluxEntry> {
        self.entries.get(cell).and_then(|e| e.as_ref())
    }

    /// `R_K(B_l)` at a boundary frame of cell `cell`, for every local basis
    /// function `l` of the entry's source cell.
    pub fn flux_row(
        &self,
        space: &TensorSplineSpace,
        map: &GeometryMap,
        cell: CellId,
        f: &TrimFrame,
    ) -> Result<FluxRow> {
        let e = self.entry(cell).ok_or(Error::MissingPlanEntry { cell })?;
        let b = space.cell_bounds(cell);
        let anchor = [0.5 * (b[0][0] + b[0][1]), 0.5 * (b[1][0] + b[1][1])];
        let n = f.frame.normal;
        let dofs = space.cell_dofs(e.source);
        let values = match &e.op {
            FluxOperator::Plain => {
                let me = map.eval_anchored(f.xi, anchor)?;
                let cb = space.eval_cell(cell, f.xi);
                cb.grads
                    .iter()
                    .map(|g| {
                        let pg = me.push_gradient(*g);
                        pg[0] * n[0] + pg[1] * n[1]
                    })
                    .collect()
            }
            FluxOperator::Parametric(ext) => {
                let me = map.eval_anchored(f.xi, anchor)?;
                let (_, bg) = ext.bernstein_basis(f.xi);
                let nl = ext.local_len();
                (0..nl)
                    .map(|l| {
                        let mut g = [0.0; 2];
                        for (k, gk) in bg.iter().enumerate() {
                            let c = ext.matrix[k * nl + l];
                            g[0] += c * gk[0];
                            g[1] += c * gk[1];
                        }
                        let pg = me.push_gradient(g);
                        pg[0] * n[0] + pg[1] * n[1]
                    })
                    .collect()
            }
            FluxOperator::Physical { bbox, alpha } => {
                let p = space.degree();
                let (_, lg) = legendre_basis(p, *bbox, f.frame.point);
                (0..alpha.ncols())
                    .map(|l| {
                        lg.iter()
                            .enumerate()
                            .map(|(m, g)| alpha[(m, l)] * (g[0] * n[0] + g[1] * n[1]))
                            .sum()
                    })
                    .collect()
            }
        };
        Ok(FluxRow { dofs, values })
    }

    /// `R_h(v_h)` at each frame of `cell` for the spline with coefficients `coeffs`.
    pub fn eval_rh(
        &self,
        space: &TensorSplineSpace,
        map: &GeometryMap,
        coeffs: &[f64],
        cell: CellId,
        frames: &[TrimFrame],
    ) -> Result<Vec<f64>> {
        frames
            .iter()
            .map(|f| {
                let r = self.flux_row(space, map, cell, f)?;
                Ok(r.dofs
                    .iter()
                    .zip(&r.values)
                    .map(|(&d, v)| coeffs[d] * v)
                    .sum())
            })
            .collect()
    }
}

/// Tensor Legendre basis on a box: values and gradients at `x`, index
/// `a + (p+1) b`.
pub fn legendre_basis(p: usize, bbox: [[f64; 2]; 2], x: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let s = [
        2.0 / (bbox[0][1] - bbox[0][0]),
        2.0 / (bbox[1][1] - bbox[1][0]),
    ];
    let u = [
        (x[0] - bbox[0][0]) * s[0] - 1.0,
        (x[1] - bbox[1][0]) * s[1] - 1.0,
    ];
    let (px, dx) = legendre_table(p, u[0]);
    let (py, dy) = legendre_table(p, u[1]);
    let n = p + 1;
    let mut v = vec![0.0; n * n];
    let mut g = vec![[0.0; 2]; n * n];
    for b in 0..n {
        for a in 0..n {
            v[a + n * b] = px[a] * py[b];
            g[a + n * b] = [dx[a] * s[0] * py[b], px[a] * dy[b] * s[1]];
        }
    }
    (v, g)
}

/// Parametric extension from `K′`: the Bernstein form of the spline on `Q′`.
pub fn parametric_flux_operator(space: &TensorSplineSpace, good: CellId) -> FluxOperator {
    FluxOperator::Parametric(space.extraction(good))
}

/// Physical extension from `K′`: L² projection of each local basis function
/// onto `Q_p(K′)` over the untrimmed image of `Q′`.
pub fn physical_flux_operator(
    space: &TensorSplineSpace,
    map: &GeometryMap,
    good: CellId,
    quad_order: usize,
) -> Result<FluxOperator> {
    let p = space.degree();
    let bounds = space.cell_bounds(good);
    let anchor = [
        0.5 * (bounds[0][0] + bounds[0][1]),
        0.5 * (bounds[1][0] + bounds[1][1]),
    ];
    // Extra points: the pulled-back integrand is rational on curved maps.
    let rule = QuadRule::tensor_box(quad_order + 2, bounds);
    let mut pts = Vec::with_capacity(rule.len());
    let mut bbox = [[f64::INFINITY, f64::NEG_INFINITY]; 2];
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let e = map.eval_anchored(*xi, anchor)?;
        for d in 0..2 {
            bbox[d][0] = bbox[d][0].min(e.point[d]);
            bbox[d][1] = bbox[d][1].max(e.point[d]);
        }
        pts.push((*xi, e.point, w * e.det.abs()));
    }
    // The bounding box of the quadrature points lies strictly inside K′'s box;
    // this only fixes the Legendre scaling.
    let nm = (p + 1) * (p + 1);
    let nl = nm;
    let mut gram = Mat::<f64>::zeros(nm, nm);
    let mut rhs = Mat::<f64>::zeros(nm, nl);
    for (xi, x, w) in &pts {
        let (lv, _) = legendre_basis(p, bbox, *x);
        let cb = space.eval_cell(good, *xi);
        for m in 0..nm {
            for k in 0..nm {
                gram[(m, k)] += w * lv[m] * lv[k];
            }
            for l in 0..nl {
                rhs[(m, l)] += w * lv[m] * cb.values[l];
            }
        }
    }
    let llt = gram.llt(FaerSide::Lower).map_err(|e| {
        Error::Numerical(format!(
            "local projection Gram matrix not SPD on cell {good}: {e:?}"
        ))
    })?;
    let alpha = llt.solve(&rhs);
    Ok(FluxOperator::Physical { bbox, alpha })
}

/// Largest `λ` with `Σ_frames h w R(v)² ≤ λ ∫_{Ω∩K′} |∇v|²` over the local
/// functions of `K′`, constants deflated.
pub fn stability_ratio(
    plan: &StabilizationPlan,
    tm: &TrimmedMesh,
    space: &TensorSplineSpace,
    map: &GeometryMap,
    cell: CellId,
) -> Result<f64> {
    let e = plan.entry(cell).ok_or(Error::MissingPlanEntry { cell })?;
    let src = e.source;
    let nl = space.cell_dofs(src).len();
    let h = tm.cell(cell).h;
    let mut num = Mat::<f64>::zeros(nl, nl);
    for f in &tm.cell(cell).trim_frames {
        let r = plan.flux_row(space, map, cell, f)?;
        for a in 0..nl {
            for b in 0..nl {
                num[(a, b)] += h * f.frame.weight * r.values[a] * r.values[b];
            }
        }
    }
    let den = gradient_form(space, map, tm, src)?;
    let ev = gen_eigenvalues(&num, &den)?;
    Ok(*ev.last().expect("nonempty spectrum"))
}

/// `∫_{Ω∩K} ∇B_a · ∇B_b` over the local basis of `cell`.
pub fn gradient_form(
    space: &TensorSplineSpace,
    map: &GeometryMap,
    tm: &TrimmedMesh,
    cell: CellId,
) -> Result<Mat<f64>> {
    let data = tm.cell(cell);
    let b = data.bounds;
    let anchor = [0.5 * (b[0][0] + b[0][1]), 0.5 * (b[1][0] + b[1][1])];
    let nl = space.cell_dofs(cell).len();
    let mut m = Mat::<f64>::zeros(nl, nl);
    for (xi, w) in data.rule.points.iter().zip(&data.rule.weights) {
        let me = map.eval_anchored(*xi, anchor)?;
        let cb = space.eval_cell(cell, *xi);
        let g: Vec<[f64; 2]> = cb.grads.iter().map(|g| me.push_gradient(*g)).collect();
        let ww = w * me.det.abs();
        for a in 0..nl {
            for c in 0..nl {
                m[(a, c)] += ww * (g[a][0] * g[c][0] + g[a][1] * g[c][1]);
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trimming::{classify_cells, TrimRegion};

    fn setup(theta: f64) -> (TensorSplineSpace, TrimmedMesh) {
        let space = TensorSplineSpace::uniform(8, 2, 1).unwrap();
        let region = TrimRegion::HalfPlaneParam {
            axis: 1,
            threshold: 0.63,
            keep_below: true,
        };
        let tm = classify_cells(&space, &GeometryMap::Identity, &region, theta, 4).unwrap();
        (space, tm)
    }

    #[test]
    fn none_mode_is_plain_everywhere() {
        let (space, tm) = setup(1.0);
        let plan = StabilizationPlan::build(&space, &GeometryMap::Identity, &tm, StabMode::None, 4)
            .unwrap();
        for c in tm.cut_cells() {
            assert!(matches!(plan.entry(c).unwrap().op, FluxOperator::Plain));
            assert_eq!(plan.entry(c).unwrap().source, c);
        }
    }

    #[test]
    fn identity_map_modes_agree() {
        let (space, tm) = setup(1.0);
        let g = GeometryMap::Identity;
        let pa = StabilizationPlan::build(&space, &g, &tm, StabMode::Parametric, 4).unwrap();
        let ph = StabilizationPlan::build(&space, &g, &tm, StabMode::Physical, 4).unwrap();
        let mut seen = 0;
        for c in tm.bad_cells() {
            for f in &tm.cell(c).trim_frames {
                let a = pa.flux_row(&space, &g, c, f).unwrap();
                let b = ph.flux_row(&space, &g, c, f).unwrap();
                assert_eq!(a.dofs, b.dofs);
                for (x, y) in a.values.iter().zip(&b.values) {
                    assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
                }
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn ratio_is_scale_invariant_and_finite() {
        let (space, tm) = setup(0.0);
        let g = GeometryMap::Identity;
        let plan = StabilizationPlan::build(&space, &g, &tm, StabMode::None, 4).unwrap();
        let c = tm.cut_cells().next().unwrap();
        let r = stability_ratio(&plan, &tm, &space, &g, c).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("physical".parse::<StabMode>().unwrap(), StabMode::Physical);
        assert!("ghost".parse::<StabMode>().is_err());
    }
}
