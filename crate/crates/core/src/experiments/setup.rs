use std::sync::Arc;

use super::config::{ExperimentConfig, GeometrySpec};
use super::solutions::ManufacturedSolution;
use crate::assembly::{BcKind, ProblemData};
use crate::geometry::{c0_quarter_annulus, quarter_annulus, GeometryMap};
use crate::spline::{KnotVector, TensorSplineSpace};
use crate::stabilization::{StabMode, StabilizationPlan};
use crate::trimming::{classify_cells, TrimRegion, TrimmedMesh};
use crate::{Error, Result};

/// One point of a sweep: mesh level plus optional ε and rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub level: u32,
    pub eps: Option<f64>,
    pub angle: Option<f64>,
}

/// Everything needed to assemble one discrete problem.
pub struct Scenario {
    pub space: TensorSplineSpace,
    pub map: GeometryMap,
    pub tm: TrimmedMesh,
    pub plan: StabilizationPlan,
    pub data: ProblemData,
    pub solution: ManufacturedSolution,
    pub quad_order: usize,
}

pub fn build_map(spec: &GeometrySpec) -> Result<GeometryMap> {
    match spec.name.as_str() {
        "identity" => Ok(GeometryMap::Identity),
        "affine" => GeometryMap::affine(spec.offset, spec.scale),
        "quarter_annulus" => Ok(quarter_annulus()),
        "c0_quarter_annulus" => Ok(c0_quarter_annulus()),
        other => Err(Error::Config(format!("unknown geometry '{other}'"))),
    }
}

/// Region of the configuration, with the rotation angle overridden.
pub fn build_region(cfg: &ExperimentConfig, angle: Option<f64>) -> Result<TrimRegion> {
    match (&cfg.region, angle) {
        (r, None) => Ok(r.clone()),
        (TrimRegion::RotatedRectKeepPhysical { center, half, .. }, Some(a)) => {
            Ok(TrimRegion::RotatedRectKeepPhysical {
                center: *center,
                half: *half,
                angle: a,
            })
        }
        _ => Err(Error::Config(
            "angle sweeps need region.kind = rotated_rect".into(),
        )),
    }
}

/// Uniform `C^{p-1}` space with `2^level` cells per direction. With `eps`,
/// the last breakpoint at or below the half-plane threshold is moved to
/// `threshold - eps`. Kink lines of the map are added with multiplicity `p`.
pub fn build_space(
    cfg: &ExperimentConfig,
    level: u32,
    eps: Option<f64>,
    map: &GeometryMap,
) -> Result<TensorSplineSpace> {
    let p = cfg.degree;
    let n = 1usize << level;
    let uniform: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut breaks = [uniform.clone(), uniform];
    if let Some(eps) = eps {
        let TrimRegion::HalfPlaneParam {
            axis, threshold, ..
        } = cfg.region
        else {
            return Err(Error::Config(
                "eps_list needs region.kind = half_plane".into(),
            ));
        };
        let b = &mut breaks[axis];
        let k = b.iter().rposition(|&x| x <= threshold).unwrap_or(0);
        let moved = threshold - eps;
        if k == 0 || moved <= b[k - 1] || moved >= 1.0 {
            return Err(Error::Config(format!(
                "eps = {eps:e} does not fit between the breakpoints below {threshold} at level {level}"
            )));
        }
        b[k] = moved;
    }
    let mut kvs = Vec::with_capacity(2);
    for (dir, b) in breaks.iter_mut().enumerate() {
        let kinks = map.kink_lines(dir);
        for &x in &kinks {
            if !b.iter().any(|&y| (y - x).abs() < 1e-14) {
                b.push(x);
            }
        }
        b.sort_by(f64::total_cmp);
        let mults: Vec<usize> = b[1..b.len() - 1]
            .iter()
            .map(|&x| {
                if kinks.iter().any(|&k| (k - x).abs() < 1e-14) {
                    p
                } else {
                    1
                }
            })
            .collect();
        kvs.push(KnotVector::from_breakpoints(p, b, &mults)?);
    }
    let ky = kvs.pop().unwrap();
    let kx = kvs.pop().unwrap();
    let space = TensorSplineSpace::new(kx, ky)?;
    if let TrimRegion::RectRemoveParam { lo, hi } = cfg.region {
        for dir in 0..2 {
            let br = space.knot_vector(dir).breakpoints();
            for c in [lo[dir], hi[dir]] {
                let interior = c > 1e-12 && c < 1.0 - 1e-12;
                if interior && br.iter().any(|&b| (b - c).abs() < 1e-12) {
                    return Err(Error::Config(format!(
                        "removed rectangle corner {c} lies on a knot line at level {level}"
                    )));
                }
            }
        }
    }
    Ok(space)
}

impl Scenario {
    pub fn build(
        cfg: &ExperimentConfig,
        at: SweepPoint,
        theta: f64,
        mode: StabMode,
    ) -> Result<Self> {
        let map = build_map(&cfg.geometry)?;
        let space = build_space(cfg, at.level, at.eps, &map)?;
        let region = build_region(cfg, at.angle)?;
        let q = cfg.quad_order();
        let tm = classify_cells(&space, &map, &region, theta, q)?;
        let plan = StabilizationPlan::build(&space, &map, &tm, mode, q)?;
        let solution = ManufacturedSolution::by_name(&cfg.solution, cfg.degree)?;
        let grad = solution.grad.clone();
        let data = ProblemData {
            f: solution.f.clone(),
            g_d: solution.u.clone(),
            g_n: Arc::new(move |x, n| {
                let g = grad(x);
                g[0] * n[0] + g[1] * n[1]
            }),
            sides: [cfg.sides; 4],
            trim: BcKind::WeakDirichlet,
            beta: cfg.beta.for_degree(cfg.degree),
        };
        Ok(Self {
            space,
            map,
            tm,
            plan,
            data,
            solution,
            quad_order: q,
        })
    }
}
