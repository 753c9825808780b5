use std::f64::consts::PI;

/// Parametric trim curve on `t ∈ [0, 1]`, oriented with the kept region on
/// its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrimCurve {
    Line {
        a: [f64; 2],
        b: [f64; 2],
    },
    /// `θ(t) = start + t (end - start)`; `end < start` runs clockwise.
    Arc {
        center: [f64; 2],
        radius: f64,
        start: f64,
        end: f64,
    },
}

impl TrimCurve {
    pub fn point(&self, t: f64) -> [f64; 2] {
        match *self {
            Self::Line { a, b } => [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
            Self::Arc {
                center,
                radius,
                start,
                end,
            } => {
                let th = start + t * (end - start);
                [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            }
        }
    }

    pub fn derivative(&self, t: f64) -> [f64; 2] {
        match *self {
            Self::Line { a, b } => [b[0] - a[0], b[1] - a[1]],
            Self::Arc {
                radius, start, end, ..
            } => {
                let th = start + t * (end - start);
                let s = (end - start) * radius;
                [-s * th.sin(), s * th.cos()]
            }
        }
    }

    /// Unit vector pointing into the kept region.
    pub fn inward(&self, t: f64) -> [f64; 2] {
        let d = self.derivative(t);
        let l = d[0].hypot(d[1]);
        [-d[1] / l, d[0] / l]
    }

    /// Parameters in the open interval `(0, 1)` where coordinate `axis`
    /// equals `value`.
    pub fn crossings(&self, axis: usize, value: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match *self {
            Self::Line { a, b } => {
                let d = b[axis] - a[axis];
                if d != 0.0 {
                    let t = (value - a[axis]) / d;
                    if t > 0.0 && t < 1.0 {
                        out.push(t);
                    }
                }
            }
            Self::Arc { .. } => {
                for th in self.angles_at(axis, value) {
                    out.extend(
                        self.angle_params(th)
                            .into_iter()
                            .filter(|&t| t > 0.0 && t < 1.0),
                    );
                }
            }
        }
        out
    }

    // Angles in [0, 2π) where the full circle has coordinate `axis` equal to `value`.
    fn angles_at(&self, axis: usize, value: f64) -> Vec<f64> {
        let Self::Arc { center, radius, .. } = *self else {
            return Vec::new();
        };
        let c = (value - center[axis]) / radius;
        if !(-1.0..=1.0).contains(&c) {
            return Vec::new();
        }
        let (t1, t2) = if axis == 0 {
            let a = c.acos();
            (a, -a)
        } else {
            let a = c.asin();
            (a, PI - a)
        };
        let mut v = vec![t1.rem_euclid(2.0 * PI)];
        let t2 = t2.rem_euclid(2.0 * PI);
        if (t2 - v[0]).abs() > 1e-15 {
            v.push(t2);
        }
        v
    }

    /// Curve parameters (any real) at which the arc passes angle `th`.
    fn angle_params(&self, th: f64) -> Vec<f64> {
        let Self::Arc { start, end, .. } = *self else {
            return Vec::new();
        };
        let span = end - start;
        let mut out = Vec::new();
        for k in -2..=2 {
            let t = (th + 2.0 * PI * k as f64 - start) / span;
            if (-1e-14..=1.0 + 1e-14).contains(&t) {
                out.push(t.clamp(0.0, 1.0));
            }
        }
        out
    }

    /// Parameters in `[t0, t1]` where coordinate `axis` is extremal along
    /// the curve (arcs only).
    pub fn extrema(&self, axis: usize, t0: f64, t1: f64) -> Vec<f64> {
        if let Self::Arc { .. } = self {
            let ths: [f64; 2] = if axis == 0 {
                [0.0, PI]
            } else {
                [0.5 * PI, 1.5 * PI]
            };
            ths.iter()
                .flat_map(|&th| self.angle_params(th))
                .filter(|&t| t > t0 && t < t1)
                .collect()
        } else {
            Vec::new()
        }
    }

    /// Parameters in `[t0, t1]` where coordinate `axis` equals `value`.
    pub fn solve_coordinate(&self, axis: usize, value: f64, t0: f64, t1: f64) -> Vec<f64> {
        let ok = |t: f64| t >= t0 - 1e-13 && t <= t1 + 1e-13;
        match *self {
            Self::Line { a, b } => {
                let d = b[axis] - a[axis];
                if d == 0.0 {
                    return Vec::new();
                }
                let t = (value - a[axis]) / d;
                if ok(t) {
                    vec![t.clamp(t0, t1)]
                } else {
                    Vec::new()
                }
            }
            Self::Arc { .. } => {
                let mut out: Vec<f64> = self
                    .angles_at(axis, value)
                    .into_iter()
                    .flat_map(|th| self.angle_params(th))
                    .filter(|&t| ok(t))
                    .map(|t| t.clamp(t0, t1))
                    .collect();
                out.sort_by(f64::total_cmp);
                out.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
                out
            }
        }
    }

    pub fn length(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            Self::Line { a, b } => (t1 - t0) * (b[0] - a[0]).hypot(b[1] - a[1]),
            Self::Arc {
                radius, start, end, ..
            } => (t1 - t0) * radius * (end - start).abs(),
        }
    }

    pub fn is_arc(&self) -> bool {
        matches!(self, Self::Arc { .. })
    }
}

/// A parameter interval `[t0, t1]` of one curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePiece {
    pub curve: usize,
    pub t0: f64,
    pub t1: f64,
}

/// Splits `[0, 1]` at every crossing with the given axis-aligned lines,
/// dropping pieces shorter than `1e-14` in parameter.
pub fn split_at_lines(curve: &TrimCurve, lines: [&[f64]; 2]) -> Vec<(f64, f64)> {
    let mut ts = vec![0.0, 1.0];
    for axis in 0..2 {
        for &v in lines[axis] {
            ts.extend(curve.crossings(axis, v));
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    ts.windows(2)
        .filter(|w| w[1] - w[0] > 1e-14)
        .map(|w| (w[0], w[1]))
        .collect()
}
