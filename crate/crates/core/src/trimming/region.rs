use std::f64::consts::PI;

use super::curve::{split_at_lines, TrimCurve};
use crate::geometry::GeometryMap;
use crate::{Error, Result};

/// Trim descriptor as given in configurations.
#[derive(Debug, Clone, PartialEq)]
pub enum TrimRegion {
    /// Keep `ξ[axis] < threshold` (or `>` when `keep_below` is false).
    HalfPlaneParam {
        axis: usize,
        threshold: f64,
        keep_below: bool,
    },
    DiskParam {
        center: [f64; 2],
        radius: f64,
        keep_outside: bool,
    },
    /// Remove the closed parametric box `[lo, hi]`.
    RectRemoveParam { lo: [f64; 2], hi: [f64; 2] },
    /// Keep a physical rectangle rotated by `angle` about its centre.
    RotatedRectKeepPhysical {
        center: [f64; 2],
        half: [f64; 2],
        angle: f64,
    },
}

/// Region in parametric coordinates: an inside predicate and boundary
/// curves clipped to the unit square.
#[derive(Debug, Clone)]
pub struct ParamRegion {
    shape: Shape,
    curves: Vec<TrimCurve>,
}

#[derive(Debug, Clone)]
enum Shape {
    HalfPlane {
        axis: usize,
        threshold: f64,
        keep_below: bool,
    },
    Disk {
        center: [f64; 2],
        radius: f64,
        keep_outside: bool,
    },
    /// Counter-clockwise vertices.
    Polygon {
        verts: Vec<[f64; 2]>,
        keep_inside: bool,
    },
}

impl TrimRegion {
    pub fn resolve(&self, map: &GeometryMap) -> Result<ParamRegion> {
        let shape = match *self {
            Self::HalfPlaneParam {
                axis,
                threshold,
                keep_below,
            } => {
                if axis > 1 {
                    return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
                }
                if !(threshold > 0.0 && threshold < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "half-plane threshold {threshold} leaves an empty or untrimmed domain"
                    )));
                }
                Shape::HalfPlane {
                    axis,
                    threshold,
                    keep_below,
                }
            }
            Self::DiskParam {
                center,
                radius,
                keep_outside,
            } => {
                if !(radius > 0.0) {
                    return Err(Error::InvalidArgument(
                        "disk radius must be positive".into(),
                    ));
                }
                Shape::Disk {
                    center,
                    radius,
                    keep_outside,
                }
            }
            Self::RectRemoveParam { lo, hi } => {
                if !(lo[0] < hi[0] && lo[1] < hi[1]) {
                    return Err(Error::InvalidArgument(
                        "rectangle corners out of order".into(),
                    ));
                }
                Shape::Polygon {
                    verts: vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]],
                    keep_inside: false,
                }
            }
            Self::RotatedRectKeepPhysical {
                center,
                half,
                angle,
            } => {
                let (s, c) = angle.sin_cos();
                let mut verts = Vec::with_capacity(4);
                for (u, v) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                    let d = [u * half[0], v * half[1]];
                    let x = [
                        center[0] + c * d[0] - s * d[1],
                        center[1] + s * d[0] + c * d[1],
                    ];
                    verts.push(map.inverse(x).ok_or_else(|| {
                        Error::InvalidArgument("physical trim regions need an affine map".into())
                    })?);
                }
                Shape::Polygon {
                    verts,
                    keep_inside: true,
                }
            }
        };
        let curves = clip_to_square(shape.raw_curves());
        let region = ParamRegion { shape, curves };
        let probes = 64;
        let any_inside = (0..probes * probes).any(|k| {
            region.inside([
                ((k % probes) as f64 + 0.5) / probes as f64,
                ((k / probes) as f64 + 0.5) / probes as f64,
            ])
        });
        if !any_inside {
            return Err(Error::InvalidArgument(
                "trim region leaves nothing of the patch".into(),
            ));
        }
        Ok(region)
    }
}

impl Shape {
    fn raw_curves(&self) -> Vec<TrimCurve> {
        match self {
            Self::HalfPlane {
                axis,
                threshold: t,
                keep_below,
            } => {
                let (a, b) = match (axis, keep_below) {
                    (1, true) => ([1.0, *t], [0.0, *t]),
                    (1, false) => ([0.0, *t], [1.0, *t]),
                    (_, true) => ([*t, 0.0], [*t, 1.0]),
                    (_, false) => ([*t, 1.0], [*t, 0.0]),
                };
                vec![TrimCurve::Line { a, b }]
            }
            Self::Disk {
                center,
                radius,
                keep_outside,
            } => {
                // Put the seam outside the unit square when possible.
                let seam = (0..64)
                    .map(|k| 2.0 * PI * k as f64 / 64.0)
                    .find(|th| {
                        let p = [center[0] + radius * th.cos(), center[1] + radius * th.sin()];
                        !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[1])
                    })
                    .unwrap_or(0.0);
                let end = if *keep_outside {
                    seam - 2.0 * PI
                } else {
                    seam + 2.0 * PI
                };
                vec![TrimCurve::Arc {
                    center: *center,
                    radius: *radius,
                    start: seam,
                    end,
                }]
            }
            Self::Polygon { verts, keep_inside } => {
                let n = verts.len();
                let mut v = verts.clone();
                if !keep_inside {
                    v.reverse();
                }
                (0..n)
                    .map(|i| TrimCurve::Line {
                        a: v[i],
                        b: v[(i + 1) % n],
                    })
                    .collect()
            }
        }
    }
}

fn on_square_boundary(p: [f64; 2]) -> Option<usize> {
    const TOL: f64 = 1e-12;
    if p[1].abs() < TOL {
        Some(0)
    } else if (p[0] - 1.0).abs() < TOL {
        Some(1)
    } else if (p[1] - 1.0).abs() < TOL {
        Some(2)
    } else if p[0].abs() < TOL {
        Some(3)
    } else {
        None
    }
}

// Keeps the parts of each curve inside the closed unit square that are not
// themselves on the square boundary, re-parametrized to [0, 1].
fn clip_to_square(curves: Vec<TrimCurve>) -> Vec<TrimCurve> {
    let mut out = Vec::new();
    for c in curves {
        for (t0, t1) in split_at_lines(&c, [&[0.0, 1.0], &[0.0, 1.0]]) {
            let m = c.point(0.5 * (t0 + t1));
            let inside =
                (-1e-12..=1.0 + 1e-12).contains(&m[0]) && (-1e-12..=1.0 + 1e-12).contains(&m[1]);
            if !inside || on_square_boundary(m).is_some() {
                continue;
            }
            out.push(match c {
                TrimCurve::Line { .. } => TrimCurve::Line {
                    a: c.point(t0),
                    b: c.point(t1),
                },
                TrimCurve::Arc {
                    center,
                    radius,
                    start,
                    end,
                } => TrimCurve::Arc {
                    center,
                    radius,
                    start: start + t0 * (end - start),
                    end: start + t1 * (end - start),
                },
            });
        }
    }
    out
}

impl ParamRegion {
    /// Whether a parametric point belongs to the kept region (open set).
    pub fn inside(&self, xi: [f64; 2]) -> bool {
        match &self.shape {
            Shape::HalfPlane {
                axis,
                threshold,
                keep_below,
            } => {
                if *keep_below {
                    xi[*axis] < *threshold
                } else {
                    xi[*axis] > *threshold
                }
            }
            Shape::Disk {
                center,
                radius,
                keep_outside,
            } => {
                let d = (xi[0] - center[0]).hypot(xi[1] - center[1]);
                if *keep_outside {
                    d > *radius
                } else {
                    d < *radius
                }
            }
            Shape::Polygon { verts, keep_inside } => {
                let inside = point_in_polygon(verts, xi);
                inside == *keep_inside
            }
        }
    }

    pub fn curves(&self) -> &[TrimCurve] {
        &self.curves
    }

    /// Closed-form parametric area of the kept part of the unit square, where
    /// the shape admits one (half-plane, rectangles, disks inside the square
    /// or centred at a corner with radius ≤ 1).
    pub fn exact_area(&self) -> Option<f64> {
        match &self.shape {
            Shape::HalfPlane {
                threshold,
                keep_below,
                ..
            } => Some(if *keep_below {
                *threshold
            } else {
                1.0 - threshold
            }),
            Shape::Disk {
                center,
                radius,
                keep_outside,
            } => {
                let r = *radius;
                let full_inside = center[0] - r >= 0.0
                    && center[0] + r <= 1.0
                    && center[1] - r >= 0.0
                    && center[1] + r <= 1.0;
                let corner = (center[0] == 0.0 || center[0] == 1.0)
                    && (center[1] == 0.0 || center[1] == 1.0)
                    && r <= 1.0;
                let disk = if full_inside {
                    PI * r * r
                } else if corner {
                    0.25 * PI * r * r
                } else {
                    return None;
                };
                Some(if *keep_outside { 1.0 - disk } else { disk })
            }
            Shape::Polygon { verts, keep_inside } => {
                if verts
                    .iter()
                    .any(|v| !(0.0..=1.0).contains(&v[0]) || !(0.0..=1.0).contains(&v[1]))
                {
                    return None;
                }
                let a = polygon_area(verts);
                Some(if *keep_inside { a } else { 1.0 - a })
            }
        }
    }
}

fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1])
        .sum::<f64>()
}

fn point_in_polygon(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = v.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_orientation(r: &ParamRegion) {
        for c in r.curves() {
            for k in 1..10 {
                let t = k as f64 / 10.0;
                let p = c.point(t);
                let n = c.inward(t);
                assert!(r.inside([p[0] + 1e-7 * n[0], p[1] + 1e-7 * n[1]]));
                assert!(!r.inside([p[0] - 1e-7 * n[0], p[1] - 1e-7 * n[1]]));
            }
        }
    }

    #[test]
    fn half_plane_curve() {
        let r = TrimRegion::HalfPlaneParam {
            axis: 1,
            threshold: 0.757,
            keep_below: true,
        }
        .resolve(&GeometryMap::Identity)
        .unwrap();
        assert_eq!(r.curves().len(), 1);
        check_orientation(&r);
    }

    #[test]
    fn corner_disk_is_a_single_clockwise_quarter() {
        let r = TrimRegion::DiskParam {
            center: [0.0, 0.0],
            radius: 0.76,
            keep_outside: true,
        }
        .resolve(&GeometryMap::Identity)
        .unwrap();
        assert_eq!(r.curves().len(), 1);
        assert!((r.curves()[0].length(0.0, 1.0) - 0.38 * PI).abs() < 1e-12);
        check_orientation(&r);
    }

    #[test]
    fn removed_rectangle_keeps_two_interior_edges() {
        let r = TrimRegion::RectRemoveParam {
            lo: [2.0 / 3.0, 0.0],
            hi: [1.0, 1.0 / 3.0],
        }
        .resolve(&GeometryMap::Identity)
        .unwrap();
        assert_eq!(r.curves().len(), 2);
        check_orientation(&r);
        assert!((r.exact_area().unwrap() - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn rotated_rectangle() {
        let r = TrimRegion::RotatedRectKeepPhysical {
            center: [0.485, 0.5],
            half: [0.295, 0.28],
            angle: 0.3,
        }
        .resolve(&GeometryMap::Identity)
        .unwrap();
        assert_eq!(r.curves().len(), 4);
        check_orientation(&r);
        assert!((r.exact_area().unwrap() - 4.0 * 0.295 * 0.28).abs() < 1e-14);
    }
}
