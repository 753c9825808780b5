use rayon::prelude::*;

use super::curve::{split_at_lines, CurvePiece, TrimCurve};
use super::cutcell::cut_cell_quadrature;
use super::region::{ParamRegion, TrimRegion};
use crate::geometry::{boundary_pushforward, BoundaryFrame, GeometryMap};
use crate::quadrature::{gauss_on_interval, QuadRule};
use crate::spline::{CellId, TensorSplineSpace};
use crate::{Error, Result};

/// Cut cells with a parametric active ratio below this are treated as empty.
pub const EMPTY_RATIO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellLabel {
    Interior,
    Exterior,
    CutGood,
    CutBad,
}

impl CellLabel {
    pub fn is_cut(self) -> bool {
        matches!(self, Self::CutGood | Self::CutBad)
    }

    pub fn is_good(self) -> bool {
        matches!(self, Self::Interior | Self::CutGood)
    }

    pub fn is_active(self) -> bool {
        self != Self::Exterior
    }
}

/// Sides of the parametric square, counter-clockwise from the bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bottom" => Some(Self::Bottom),
            "right" => Some(Self::Right),
            "top" => Some(Self::Top),
            "left" => Some(Self::Left),
            _ => None,
        }
    }

    /// Fixed coordinate axis and its value.
    pub fn fixed(self) -> (usize, f64) {
        match self {
            Self::Bottom => (1, 0.0),
            Self::Right => (0, 1.0),
            Self::Top => (1, 1.0),
            Self::Left => (0, 0.0),
        }
    }

    /// The side as a curve with the square on its left.
    pub fn curve(self) -> TrimCurve {
        let (a, b) = match self {
            Self::Bottom => ([0.0, 0.0], [1.0, 0.0]),
            Self::Right => ([1.0, 0.0], [1.0, 1.0]),
            Self::Top => ([1.0, 1.0], [0.0, 1.0]),
            Self::Left => ([0.0, 1.0], [0.0, 0.0]),
        };
        TrimCurve::Line { a, b }
    }
}

/// Boundary quadrature point: parametric location plus physical frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimFrame {
    pub xi: [f64; 2],
    pub frame: BoundaryFrame,
}

#[derive(Debug, Clone)]
pub struct CellData {
    pub label: CellLabel,
    pub bounds: [[f64; 2]; 2],
    /// `|Ω̂ ∩ Q| / |Q|`.
    pub ratio: f64,
    /// `|Ω ∩ K| / |K|` in physical measure.
    pub phys_ratio: f64,
    /// `|Ω ∩ K|`.
    pub phys_area: f64,
    /// Physical cell diameter.
    pub h: f64,
    /// Parametric points and weights covering `Q ∩ Ω̂` (no Jacobian factor).
    pub rule: QuadRule,
    pub trim_frames: Vec<TrimFrame>,
    pub side_frames: Vec<(Side, TrimFrame)>,
}

#[derive(Debug, Clone)]
pub struct TrimmedMesh {
    grid: [usize; 2],
    theta: f64,
    region: ParamRegion,
    cells: Vec<CellData>,
    neighbors: Vec<Option<CellId>>,
    /// Active parametric intervals of each side.
    side_intervals: [Vec<(f64, f64)>; 4],
}

impl TrimmedMesh {
    pub fn cell(&self, id: CellId) -> &CellData {
        &self.cells[id]
    }

    pub fn cells(&self) -> &[CellData] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn grid(&self) -> [usize; 2] {
        self.grid
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn region(&self) -> &ParamRegion {
        &self.region
    }

    pub fn label(&self, id: CellId) -> CellLabel {
        self.cells[id].label
    }

    /// Good neighbor assigned to a bad cell.
    pub fn neighbor(&self, id: CellId) -> Option<CellId> {
        self.neighbors[id]
    }

    pub fn cut_cells(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.cells.len()).filter(|&c| self.cells[c].label.is_cut())
    }

    pub fn bad_cells(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.cells.len()).filter(|&c| self.cells[c].label == CellLabel::CutBad)
    }

    pub fn side_intervals(&self, side: Side) -> &[(f64, f64)] {
        &self.side_intervals[side as usize]
    }

    /// Total parametric measure of `Ω̂`.
    pub fn param_area(&self) -> f64 {
        self.cells.iter().map(|c| c.rule.total_weight()).sum()
    }

    /// Total physical length of the trimming curves.
    pub fn trim_length(&self) -> f64 {
        self.cells
            .iter()
            .flat_map(|c| &c.trim_frames)
            .map(|f| f.frame.weight)
            .sum()
    }

    /// Smallest `|Ω ∩ K|` over cut cells.
    pub fn min_cut_volume(&self) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.label.is_cut())
            .map(|c| c.phys_area)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Parametric Gauss rule along a curve piece.
fn piece_frames(
    curve: &TrimCurve,
    t0: f64,
    t1: f64,
    n: usize,
    map: &GeometryMap,
    anchor: [f64; 2],
) -> Result<Vec<TrimFrame>> {
    let (ts, ws) = gauss_on_interval(n, t0, t1);
    let mut out = Vec::with_capacity(n);
    for (t, w) in ts.iter().zip(&ws) {
        let xi = curve.point(*t);
        let d = curve.derivative(*t);
        let e = map.eval_anchored(xi, anchor)?;
        let mut f = boundary_pushforward(&e, d, true)?;
        f.weight *= w;
        out.push(TrimFrame { xi, frame: f });
    }
    Ok(out)
}

fn locate(breaks: &[f64], x: f64) -> usize {
    let k = breaks.partition_point(|&b| b <= x);
    k.clamp(1, breaks.len() - 1) - 1
}

/// Cell index along one axis for a point on a piece with inward normal
/// component `n`. Points on a breakpoint go to the side `n` points to.
fn locate_inward(breaks: &[f64], x: f64, n: f64) -> usize {
    let k = locate(breaks, x);
    let last = breaks.len() - 2;
    if (x - breaks[k]).abs() <= 1e-13 && n < 0.0 && k > 0 {
        k - 1
    } else if (x - breaks[k + 1]).abs() <= 1e-13 && n > 0.0 && k < last {
        k + 1
    } else {
        k
    }
}

fn gauss_count(curve: &TrimCurve, n: usize) -> usize {
    if curve.is_arc() {
        n + 2
    } else {
        n
    }
}

/// Classifies every cell, builds interior and boundary rules and assigns
/// good neighbors to bad cells. `theta = 0` makes every cut cell good.
pub fn classify_cells(
    space: &TensorSplineSpace,
    map: &GeometryMap,
    region: &TrimRegion,
    theta: f64,
    quad_order: usize,
) -> Result<TrimmedMesh> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "theta = {theta} outside [0, 1]"
        )));
    }
    let region = region.resolve(map)?;
    let grid = space.grid();
    let bx = space.knot_vector(0).breakpoints();
    let by = space.knot_vector(1).breakpoints();
    let inner_x = &bx[1..bx.len() - 1];
    let inner_y = &by[1..by.len() - 1];

    // Trim curve pieces, each assigned to the cell on its kept side.
    let mut cell_pieces: Vec<Vec<CurvePiece>> = vec![Vec::new(); space.num_cells()];
    for (ci, c) in region.curves().iter().enumerate() {
        for (t0, t1) in split_at_lines(c, [inner_x, inner_y]) {
            let tm = 0.5 * (t0 + t1);
            let m = c.point(tm);
            let nrm = c.inward(tm);
            let id = space.cell_id(
                locate_inward(bx, m[0], nrm[0]),
                locate_inward(by, m[1], nrm[1]),
            );
            cell_pieces[id].push(CurvePiece { curve: ci, t0, t1 });
        }
    }

    // Active side intervals: split at breakpoints and trim-curve endpoints.
    let mut side_pieces: Vec<Vec<(Side, f64, f64)>> = vec![Vec::new(); space.num_cells()];
    let mut side_intervals: [Vec<(f64, f64)>; 4] = Default::default();
    for side in Side::ALL {
        let curve = side.curve();
        let (axis, _) = side.fixed();
        let along = 1 - axis;
        let mut cuts: Vec<f64> = if along == 0 {
            inner_x.to_vec()
        } else {
            inner_y.to_vec()
        };
        for c in region.curves() {
            for p in [c.point(0.0), c.point(1.0)] {
                let (ax, v) = side.fixed();
                if (p[ax] - v).abs() < 1e-12 {
                    cuts.push(p[along]);
                }
            }
        }
        let lines: [&[f64]; 2] = if along == 0 {
            [&cuts, &[]]
        } else {
            [&[], &cuts]
        };
        for (t0, t1) in split_at_lines(&curve, lines) {
            let tm = 0.5 * (t0 + t1);
            let m = curve.point(tm);
            let nrm = curve.inward(tm);
            let probe = [m[0] + 1e-10 * nrm[0], m[1] + 1e-10 * nrm[1]];
            if !region.inside(probe) {
                continue;
            }
            let id = space.cell_id(
                locate_inward(bx, m[0], nrm[0]),
                locate_inward(by, m[1], nrm[1]),
            );
            side_pieces[id].push((side, t0, t1));
            let (a, b) = (curve.point(t0)[along], curve.point(t1)[along]);
            side_intervals[side as usize].push((a.min(b), a.max(b)));
        }
        side_intervals[side as usize].sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let curves = region.curves();
    let cells: Vec<CellData> = (0..space.num_cells())
        .into_par_iter()
        .map(|id| -> Result<CellData> {
            let bounds = space.cell_bounds(id);
            let anchor = [
                0.5 * (bounds[0][0] + bounds[0][1]),
                0.5 * (bounds[1][0] + bounds[1][1]),
            ];
            let pieces = &cell_pieces[id];
            let rule = cut_cell_quadrature(bounds, &region, pieces, quad_order)?;
            let area = (bounds[0][1] - bounds[0][0]) * (bounds[1][1] - bounds[1][0]);
            let ratio = (rule.total_weight() / area).min(1.0);
            let full = QuadRule::tensor_box(quad_order, bounds);
            let det = |x: [f64; 2]| map.eval_anchored(x, anchor).map(|e| e.det.abs());
            let mut full_phys = 0.0;
            for (x, w) in full.points.iter().zip(&full.weights) {
                full_phys += w * det(*x)?;
            }
            let mut phys_area = 0.0;
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                phys_area += w * det(*x)?;
            }
            let label = if pieces.is_empty() {
                if ratio > 0.5 {
                    CellLabel::Interior
                } else {
                    CellLabel::Exterior
                }
            } else if ratio <= EMPTY_RATIO {
                CellLabel::Exterior
            } else if ratio >= theta {
                CellLabel::CutGood
            } else {
                CellLabel::CutBad
            };
            let mut trim_frames = Vec::new();
            let mut side_frames = Vec::new();
            if label.is_active() {
                for p in pieces {
                    let c = &curves[p.curve];
                    trim_frames.extend(piece_frames(
                        c,
                        p.t0,
                        p.t1,
                        gauss_count(c, quad_order),
                        map,
                        anchor,
                    )?);
                }
                for &(side, t0, t1) in &side_pieces[id] {
                    for f in piece_frames(&side.curve(), t0, t1, quad_order, map, anchor)? {
                        side_frames.push((side, f));
                    }
                }
            }
            Ok(CellData {
                label,
                bounds,
                ratio: if label == CellLabel::Exterior {
                    0.0
                } else {
                    ratio
                },
                phys_ratio: phys_area / full_phys,
                phys_area,
                h: map.cell_diameter(bounds)?,
                rule: if label == CellLabel::Exterior {
                    QuadRule::default()
                } else {
                    rule
                },
                trim_frames,
                side_frames,
            })
        })
        .collect::<Result<_>>()?;

    let mut mesh = TrimmedMesh {
        grid,
        theta,
        region,
        cells,
        neighbors: vec![None; space.num_cells()],
        side_intervals,
    };
    let bad: Vec<CellId> = mesh.bad_cells().collect();
    for id in bad {
        mesh.neighbors[id] = Some(select_good_neighbor(&mesh, id)?);
    }
    Ok(mesh)
}

/// Good cell with the largest physical overlap `|K′ ∩ Ω| / |K′|` among the
/// 3×3 neighborhood, widened once to 5×5. Ties go to the nearer cell, then
/// to the lower index.
pub fn select_good_neighbor(tm: &TrimmedMesh, bad: CellId) -> Result<CellId> {
    if tm.label(bad).is_good() {
        return Ok(bad);
    }
    let [m1, m2] = tm.grid;
    let (i, j) = ((bad % m1) as isize, (bad / m1) as isize);
    for radius in [1isize, 2] {
        let mut best: Option<(f64, isize, CellId)> = None;
        for dj in -radius..=radius {
            for di in -radius..=radius {
                let (a, b) = (i + di, j + dj);
                if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= m1 as isize || b >= m2 as isize {
                    continue;
                }
                let id = a as usize + m1 * b as usize;
                if !tm.label(id).is_good() {
                    continue;
                }
                let cand = (tm.cells[id].phys_ratio, di * di + dj * dj, id);
                best = match best {
                    None => Some(cand),
                    Some(cur) => {
                        let better = if (cand.0 - cur.0).abs() > 1e-12 {
                            cand.0 > cur.0
                        } else {
                            (cand.1, cand.2) < (cur.1, cur.2)
                        };
                        Some(if better { cand } else { cur })
                    }
                };
            }
        }
        if let Some((_, _, id)) = best {
            return Ok(id);
        }
    }
    Err(Error::NoGoodNeighbor { cell: bad })
}
