//! Quadrature on `Q ∩ Ω̂` by slicing the cell into tiles bounded by two
//! graphs over a sweep axis.

use super::curve::{CurvePiece, TrimCurve};
use super::region::ParamRegion;
use crate::quadrature::{gauss_on_interval, QuadRule};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
enum Branch {
    Const(f64),
    /// `v(u)` along the straight line through `a` and `b` (in sweep coordinates).
    Line {
        a: [f64; 2],
        b: [f64; 2],
    },
    Circle {
        center: [f64; 2],
        radius: f64,
        sign: f64,
    },
}

impl Branch {
    fn eval(&self, u: f64) -> f64 {
        match *self {
            Self::Const(v) => v,
            Self::Line { a, b } => a[1] + (u - a[0]) / (b[0] - a[0]) * (b[1] - a[1]),
            Self::Circle {
                center,
                radius,
                sign,
            } => {
                let d = (radius * radius - (u - center[0]).powi(2)).max(0.0);
                center[1] + sign * d.sqrt()
            }
        }
    }

    fn is_const(&self) -> bool {
        matches!(self, Self::Const(_))
    }
}

fn swap(p: [f64; 2], s: usize) -> [f64; 2] {
    if s == 0 {
        p
    } else {
        [p[1], p[0]]
    }
}

// Largest |dv/du| of an arc piece for sweep axis `s`, sampled densely.
fn arc_steepness(c: &TrimCurve, t0: f64, t1: f64, s: usize) -> f64 {
    (0..=16)
        .map(|k| {
            let d = c.derivative(t0 + (t1 - t0) * k as f64 / 16.0);
            let d = swap(d, s);
            d[1].abs() / d[0].abs().max(1e-300)
        })
        .fold(0.0, f64::max)
}

/// Interior rule on `Q ∩ Ω̂` for a cell crossed by `pieces`. Uses `n` Gauss
/// points transversally and `2n` along the sweep for tiles with a curved or
/// slanted side.
pub fn cut_cell_quadrature(
    bounds: [[f64; 2]; 2],
    region: &ParamRegion,
    pieces: &[CurvePiece],
    n: usize,
) -> Result<QuadRule> {
    if pieces.is_empty() {
        let c = [
            0.5 * (bounds[0][0] + bounds[0][1]),
            0.5 * (bounds[1][0] + bounds[1][1]),
        ];
        return Ok(if region.inside(c) {
            QuadRule::tensor_box(n, bounds)
        } else {
            QuadRule::default()
        });
    }
    check_edge_crossings(bounds, region, pieces)?;
    let curves = region.curves();

    let steep = |s: usize| {
        pieces
            .iter()
            .filter(|p| curves[p.curve].is_arc())
            .map(|p| arc_steepness(&curves[p.curve], p.t0, p.t1, s))
            .fold(0.0, f64::max)
    };
    let s = if steep(0) <= steep(1) { 0 } else { 1 };
    let q = 1 - s;
    let (ulo, uhi) = (bounds[s][0], bounds[s][1]);
    let (vlo, vhi) = (bounds[q][0], bounds[q][1]);
    let scale = (uhi - ulo).max(vhi - vlo);

    let mut events = vec![ulo, uhi];
    for p in pieces {
        let c = &curves[p.curve];
        events.push(c.point(p.t0)[s]);
        events.push(c.point(p.t1)[s]);
        for t in c.extrema(s, p.t0, p.t1) {
            events.push(c.point(t)[s]);
        }
    }
    events.retain(|&u| u >= ulo && u <= uhi);
    events.sort_by(f64::total_cmp);
    events.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * scale);

    let mut rule = QuadRule::default();
    for w in events.windows(2) {
        let (u0, u1) = (w[0], w[1]);
        if u1 - u0 <= 1e-14 * scale {
            continue;
        }
        let um = 0.5 * (u0 + u1);
        let mut cross: Vec<(f64, Branch)> = Vec::new();
        for p in pieces {
            let c = &curves[p.curve];
            for t in c.solve_coordinate(s, um, p.t0, p.t1) {
                let v = c.point(t)[q];
                let br = match *c {
                    TrimCurve::Line { a, b } => {
                        let (a, b) = (swap(a, s), swap(b, s));
                        if (b[0] - a[0]).abs() < 1e-300 {
                            continue;
                        }
                        Branch::Line { a, b }
                    }
                    TrimCurve::Arc { center, radius, .. } => {
                        let cc = swap(center, s);
                        Branch::Circle {
                            center: cc,
                            radius,
                            sign: if v >= cc[1] { 1.0 } else { -1.0 },
                        }
                    }
                };
                cross.push((v, br));
            }
        }
        cross.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut bounds_v = vec![(vlo, Branch::Const(vlo))];
        bounds_v.extend(cross.into_iter().filter(|(v, _)| *v > vlo && *v < vhi));
        bounds_v.push((vhi, Branch::Const(vhi)));
        for k in 0..bounds_v.len() - 1 {
            let (va, lo) = bounds_v[k];
            let (vb, hi) = bounds_v[k + 1];
            if vb - va <= 1e-14 * scale {
                continue;
            }
            if !region.inside(swap([um, 0.5 * (va + vb)], s)) {
                continue;
            }
            let nu = if lo.is_const() && hi.is_const() {
                n
            } else {
                2 * n
            };
            let (us, wus) = gauss_on_interval(nu, u0, u1);
            for (u, wu) in us.iter().zip(&wus) {
                let a = lo.eval(*u).clamp(vlo, vhi);
                let b = hi.eval(*u).clamp(vlo, vhi);
                if b <= a {
                    continue;
                }
                let (vs, wvs) = gauss_on_interval(n, a, b);
                for (v, wv) in vs.iter().zip(&wvs) {
                    rule.push(swap([*u, *v], s), wu * wv);
                }
            }
        }
    }
    Ok(rule)
}

// More than two boundary crossings on one cell edge is outside the
// supported configurations.
fn check_edge_crossings(
    bounds: [[f64; 2]; 2],
    region: &ParamRegion,
    pieces: &[CurvePiece],
) -> Result<()> {
    let curves = region.curves();
    let tol = 1e-12;
    for axis in 0..2 {
        for side in 0..2 {
            let val = bounds[axis][side];
            let mut hits: Vec<f64> = Vec::new();
            for p in pieces {
                for t in [p.t0, p.t1] {
                    let x = curves[p.curve].point(t);
                    if (x[axis] - val).abs() < tol
                        && !hits.iter().any(|h| (h - x[1 - axis]).abs() < tol)
                    {
                        hits.push(x[1 - axis]);
                    }
                }
            }
            if hits.len() > 2 {
                return Err(Error::Tiling(format!(
                    "{} trim crossings on one edge of cell {:?}",
                    hits.len(),
                    bounds
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometryMap;
    use crate::trimming::curve::split_at_lines;
    use crate::trimming::TrimRegion;

    fn pieces_in(region: &ParamRegion, b: [[f64; 2]; 2]) -> Vec<CurvePiece> {
        let mut out = Vec::new();
        for (i, c) in region.curves().iter().enumerate() {
            for (t0, t1) in split_at_lines(c, [&b[0], &b[1]]) {
                let m = c.point(0.5 * (t0 + t1));
                if m[0] > b[0][0] && m[0] < b[0][1] && m[1] > b[1][0] && m[1] < b[1][1] {
                    out.push(CurvePiece { curve: i, t0, t1 });
                }
            }
        }
        out
    }

    #[test]
    fn slanted_cut_matches_polygon_moments() {
        // keep the part of the unit cell above the line from (0, 0.2) to (1, 0.7)
        let region = TrimRegion::RotatedRectKeepPhysical {
            center: [0.5, 1.0],
            half: [2.0, 0.55],
            angle: (0.5f64).atan(),
        }
        .resolve(&GeometryMap::Identity)
        .unwrap();
        let b = [[0.0, 1.0], [0.0, 1.0]];
        let rule = cut_cell_quadrature(b, &region, &pieces_in(&region, b), 4).unwrap();
        // exact region: y > 0.45 + 0.5 (x - 0.5) - 0.55 / cos(α) ... compare against sampled polygon
        let c = region.curves();
        assert!(!c.is_empty());
        assert!(rule.weights.iter().all(|w| *w > 0.0));
        assert!(rule.points.iter().all(|p| region.inside(*p)));
        // area by fine midpoint sampling as a loose cross-check
        let m = 400;
        let mut cnt = 0;
        for i in 0..m {
            for j in 0..m {
                if region.inside([(i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64]) {
                    cnt += 1;
                }
            }
        }
        assert!((rule.total_weight() - cnt as f64 / (m * m) as f64).abs() < 5e-3);
    }

    #[test]
    fn disk_cell_areas_sum_to_closed_form() {
        let region = TrimRegion::DiskParam {
            center: [0.0, 0.0],
            radius: 0.76,
            keep_outside: true,
        }
        .resolve(&GeometryMap::Identity)
        .unwrap();
        let m = 8;
        let mut total = 0.0;
        for j in 0..m {
            for i in 0..m {
                let b = [
                    [i as f64 / m as f64, (i + 1) as f64 / m as f64],
                    [j as f64 / m as f64, (j + 1) as f64 / m as f64],
                ];
                total += cut_cell_quadrature(b, &region, &pieces_in(&region, b), 4)
                    .unwrap()
                    .total_weight();
            }
        }
        let removed = 1.0 - total;
        assert!(
            (removed - std::f64::consts::PI * 0.76 * 0.76 / 4.0).abs() < 1e-8,
            "{removed}"
        );
    }
}
