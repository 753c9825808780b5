//! Parametric-to-physical maps `F: [0,1]² → Ω₀`.
//!
//! NURBS control points are stored homogeneously as `(w·x, w·y, w)`.

use crate::spline::{insert_knot_points, KnotVector};
use crate::{Error, Result};

/// Value, Jacobian `jac[r][c] = ∂x_r/∂ξ_c` and Jacobian determinant of `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapEval {
    pub point: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub det: f64,
}

impl MapEval {
    /// `J^{-T} g`: maps a parametric gradient to the physical one.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.jac;
        [
            (d * g[0] - c * g[1]) / self.det,
            (-b * g[0] + a * g[1]) / self.det,
        ]
    }

    pub fn push_vector(&self, t: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.jac;
        [a * t[0] + b * t[1], c * t[0] + d * t[1]]
    }
}

/// A quadrature point on a physical boundary curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub point: [f64; 2],
    /// Quadrature weight times the arc-length factor.
    pub weight: f64,
    /// Outward unit normal.
    pub normal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NurbsMap {
    kv: [KnotVector; 2],
    /// Homogeneous control net, first direction fastest.
    ctrl: Vec<[f64; 3]>,
}

impl NurbsMap {
    pub fn new(kv: [KnotVector; 2], ctrl: Vec<[f64; 3]>) -> Result<Self> {
        if kv[0].degree() != kv[1].degree() {
            return Err(Error::InvalidGeometry("geometry degrees differ".into()));
        }
        if ctrl.len() != kv[0].num_basis() * kv[1].num_basis() {
            return Err(Error::InvalidGeometry(format!(
                "expected {} control points, got {}",
                kv[0].num_basis() * kv[1].num_basis(),
                ctrl.len()
            )));
        }
        if ctrl.iter().any(|c| !(c[2] > 0.0)) {
            return Err(Error::InvalidGeometry("weights must be positive".into()));
        }
        Ok(Self { kv, ctrl })
    }

    pub fn knot_vector(&self, dir: usize) -> &KnotVector {
        &self.kv[dir]
    }

    pub fn control_points(&self) -> &[[f64; 3]] {
        &self.ctrl
    }

    pub fn control_point_mut(&mut self, i1: usize, i2: usize) -> &mut [f64; 3] {
        let n1 = self.kv[0].num_basis();
        &mut self.ctrl[i1 + n1 * i2]
    }

    /// Inserts `x` into direction `dir`, keeping the map unchanged.
    pub fn insert_knot(&mut self, dir: usize, x: f64) -> Result<()> {
        let [n1, n2] = [self.kv[0].num_basis(), self.kv[1].num_basis()];
        let (rows, len) = if dir == 0 { (n2, n1) } else { (n1, n2) };
        let idx = |line: usize, k: usize| {
            if dir == 0 {
                k + n1 * line
            } else {
                line + n1 * k
            }
        };
        let mut new_kv = None;
        let mut lines = Vec::with_capacity(rows);
        for line in 0..rows {
            let flat: Vec<f64> = (0..len).flat_map(|k| self.ctrl[idx(line, k)]).collect();
            let (kv, out) = insert_knot_points(&self.kv[dir], &flat, 3, x)?;
            new_kv = Some(kv);
            lines.push(out);
        }
        let kv = new_kv.expect("nonempty control net");
        let (m1, m2) = if dir == 0 { (n1 + 1, n2) } else { (n1, n2 + 1) };
        let mut ctrl = vec![[0.0; 3]; m1 * m2];
        for (line, out) in lines.iter().enumerate() {
            for k in 0..len + 1 {
                let pos = if dir == 0 {
                    k + m1 * line
                } else {
                    line + m1 * k
                };
                ctrl[pos] = [out[3 * k], out[3 * k + 1], out[3 * k + 2]];
            }
        }
        self.kv[dir] = kv;
        self.ctrl = ctrl;
        Ok(())
    }

    fn eval_with_spans(&self, xi: [f64; 2], span: [usize; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let bx = self.kv[0].eval_in_span(span[0], xi[0], 1);
        let by = self.kv[1].eval_in_span(span[1], xi[1], 1);
        let n1 = self.kv[0].num_basis();
        // s[0] value, s[1] d/dξ1, s[2] d/dξ2 of (wx, wy, w)
        let mut s = [[0.0; 3]; 3];
        for (b, (nb, db)) in by.ders[0].iter().zip(&by.ders[1]).enumerate() {
            for (a, (na, da)) in bx.ders[0].iter().zip(&bx.ders[1]).enumerate() {
                let c = self.ctrl[(bx.first + a) + n1 * (by.first + b)];
                let f = [na * nb, da * nb, na * db];
                for (sk, fk) in s.iter_mut().zip(f) {
                    for d in 0..3 {
                        sk[d] += fk * c[d];
                    }
                }
            }
        }
        let w = s[0][2];
        let x = [s[0][0] / w, s[0][1] / w];
        let mut jac = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                jac[r][c] = (s[c + 1][r] - x[r] * s[c + 1][2]) / w;
            }
        }
        (x, jac)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryMap {
    Identity,
    /// `x = offset + scale ⊙ ξ`.
    Affine {
        offset: [f64; 2],
        scale: [f64; 2],
    },
    Nurbs(NurbsMap),
}

impl GeometryMap {
    pub fn affine(offset: [f64; 2], scale: [f64; 2]) -> Result<Self> {
        if !(scale[0] > 0.0 && scale[1] > 0.0) {
            return Err(Error::InvalidGeometry(
                "affine scales must be positive".into(),
            ));
        }
        Ok(Self::Affine { offset, scale })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Affine { .. } => "affine",
            Self::Nurbs(_) => "nurbs",
        }
    }

    /// Evaluates `F` at `xi`. On a line where the map is only C⁰ the
    /// right-continuous piece is used; see [`Self::eval_anchored`].
    pub fn map_eval(&self, xi: [f64; 2]) -> Result<MapEval> {
        for &t in &xi {
            if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                return Err(Error::OutOfDomain(t));
            }
        }
        self.eval_anchored(xi, xi)
    }

    /// Evaluates the polynomial piece of `F` that contains `anchor` at `xi`.
    /// Quadrature on a cell passes the cell centre as anchor so points on a
    /// C⁰ line get the one-sided Jacobian of that cell.
    pub fn eval_anchored(&self, xi: [f64; 2], anchor: [f64; 2]) -> Result<MapEval> {
        let (point, jac) = match self {
            Self::Identity => (xi, [[1.0, 0.0], [0.0, 1.0]]),
            Self::Affine { offset, scale } => (
                [offset[0] + scale[0] * xi[0], offset[1] + scale[1] * xi[1]],
                [[scale[0], 0.0], [0.0, scale[1]]],
            ),
            Self::Nurbs(m) => {
                let a = [anchor[0].clamp(0.0, 1.0), anchor[1].clamp(0.0, 1.0)];
                m.eval_with_spans(xi, [m.kv[0].find_span(a[0]), m.kv[1].find_span(a[1])])
            }
        };
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det.abs() > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "singular Jacobian (det J = {det:e}) at ({}, {})",
                xi[0], xi[1]
            )));
        }
        Ok(MapEval { point, jac, det })
    }

    /// Parametric preimage, available for identity and affine maps.
    pub fn inverse(&self, x: [f64; 2]) -> Option<[f64; 2]> {
        match self {
            Self::Identity => Some(x),
            Self::Affine { offset, scale } => {
                Some([(x[0] - offset[0]) / scale[0], (x[1] - offset[1]) / scale[1]])
            }
            Self::Nurbs(_) => None,
        }
    }

    /// Parametric lines across which the map may be only C⁰, per direction.
    pub fn kink_lines(&self, dir: usize) -> Vec<f64> {
        match self {
            Self::Nurbs(m) => {
                let kv = &m.kv[dir];
                let p = kv.degree();
                let br = kv.breakpoints();
                br[1..br.len() - 1]
                    .iter()
                    .copied()
                    .filter(|&b| kv.multiplicity(b) >= p)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Diameter of the physical image of a parametric box, estimated from the
    /// corners and edge midpoints.
    pub fn cell_diameter(&self, bounds: [[f64; 2]; 2]) -> Result<f64> {
        let anchor = [
            0.5 * (bounds[0][0] + bounds[0][1]),
            0.5 * (bounds[1][0] + bounds[1][1]),
        ];
        let mut pts = Vec::with_capacity(9);
        for t in [0.0, 0.5, 1.0] {
            for s in [0.0, 0.5, 1.0] {
                if s == 0.5 && t == 0.5 {
                    continue;
                }
                let xi = [
                    bounds[0][0] + s * (bounds[0][1] - bounds[0][0]),
                    bounds[1][0] + t * (bounds[1][1] - bounds[1][0]),
                ];
                pts.push(self.eval_anchored(xi, anchor)?.point);
            }
        }
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max((pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]));
            }
        }
        Ok(d)
    }

    /// Sign of `det J` (the quarter annuli reverse orientation).
    pub fn orientation(&self) -> f64 {
        self.map_eval([0.5, 0.5])
            .map(|e| e.det.signum())
            .unwrap_or(1.0)
    }

    /// Verifies that `det J` keeps one strict sign on an `n × n` sample grid,
    /// both sides of kinks included.
    pub fn check_bijective(&self, n: usize) -> Result<()> {
        let sign = self.orientation();
        let check = |xi: [f64; 2]| -> Result<()> {
            let e = self.map_eval(xi)?;
            if e.det * sign <= 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "Jacobian changes sign at {xi:?}"
                )));
            }
            Ok(())
        };
        for j in 0..=n {
            for i in 0..=n {
                check([i as f64 / n as f64, j as f64 / n as f64])?;
            }
        }
        for dir in 0..2 {
            for k in self.kink_lines(dir) {
                for j in 0..=n {
                    let t = j as f64 / n as f64;
                    for off in [-1e-6, 1e-6] {
                        let mut xi = [t, t];
                        xi[dir] = k + off;
                        check(xi)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Pushes a parametric curve point forward. `tangent` is the parametric
/// curve derivative; `omega_on_left` says whether the kept region lies to
/// the left of it in the parametric plane. A negative `det J` swaps sides.
pub fn boundary_pushforward(
    eval: &MapEval,
    tangent: [f64; 2],
    omega_on_left: bool,
) -> Result<BoundaryFrame> {
    let t = eval.push_vector(tangent);
    let len = t[0].hypot(t[1]);
    if !(len > 0.0) {
        return Err(Error::InvalidArgument("degenerate boundary tangent".into()));
    }
    let right = [t[1] / len, -t[0] / len];
    let normal = if omega_on_left == (eval.det > 0.0) {
        right
    } else {
        [-right[0], -right[1]]
    };
    Ok(BoundaryFrame {
        point: eval.point,
        weight: len,
        normal,
    })
}

/// Biquadratic quarter annulus with radii 1 and 2. Direction 1 sweeps the
/// angle from 0 to π/2, direction 2 the radius.
pub fn quarter_annulus() -> GeometryMap {
    let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).expect("valid knots");
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let arc = [([1.0, 0.0], 1.0), ([1.0, 1.0], w), ([0.0, 1.0], 1.0)];
    let mut ctrl = Vec::with_capacity(9);
    for r in [1.0, 1.5, 2.0] {
        for (p, wt) in arc {
            ctrl.push([wt * r * p[0], wt * r * p[1], wt]);
        }
    }
    GeometryMap::Nurbs(NurbsMap::new([kv.clone(), kv], ctrl).expect("valid net"))
}

/// Quarter annulus made C⁰ along `ξ = 0.75`: the knot is inserted twice in
/// the angular direction and the inner-rim control point on that column gets
/// homogeneous second coordinate `w·y = 0.5`. The same edit on the middle or
/// outer row folds the map.
pub fn c0_quarter_annulus() -> GeometryMap {
    let GeometryMap::Nurbs(mut m) = quarter_annulus() else {
        unreachable!()
    };
    m.insert_knot(0, 0.75).expect("first insertion");
    m.insert_knot(0, 0.75).expect("second insertion");
    m.control_point_mut(2, 0)[1] = 0.5;
    GeometryMap::Nurbs(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 2], b: [f64; 2], tol: f64) -> bool {
        (a[0] - b[0]).abs() < tol && (a[1] - b[1]).abs() < tol
    }

    #[test]
    fn identity_and_affine() {
        let e = GeometryMap::Identity.map_eval([0.3, 0.7]).unwrap();
        assert_eq!(e.point, [0.3, 0.7]);
        assert_eq!(e.det, 1.0);
        let a = GeometryMap::affine([-2.0, -1.0], [3.0, 3.0]).unwrap();
        let e = a.map_eval([0.0, 0.0]).unwrap();
        assert_eq!(e.point, [-2.0, -1.0]);
        assert_eq!(e.det, 9.0);
        assert_eq!(a.inverse([1.0, 2.0]), Some([1.0, 1.0]));
    }

    #[test]
    fn annulus_corners_and_midpoint() {
        let g = quarter_annulus();
        assert!(close(
            g.map_eval([0.0, 0.0]).unwrap().point,
            [1.0, 0.0],
            1e-15
        ));
        assert!(close(
            g.map_eval([1.0, 0.0]).unwrap().point,
            [0.0, 1.0],
            1e-15
        ));
        assert!(close(
            g.map_eval([0.0, 1.0]).unwrap().point,
            [2.0, 0.0],
            1e-15
        ));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(g.map_eval([0.5, 0.0]).unwrap().point, [h, h], 1e-14));
    }

    #[test]
    fn annulus_inner_rim_is_a_circle() {
        let g = quarter_annulus();
        for i in 0..50 {
            let p = g.map_eval([i as f64 / 49.0, 0.0]).unwrap().point;
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
        g.check_bijective(50).unwrap();
    }

    #[test]
    fn knot_insertion_preserves_the_map() {
        let g = quarter_annulus();
        let GeometryMap::Nurbs(mut m) = g.clone() else {
            unreachable!()
        };
        m.insert_knot(0, 0.3).unwrap();
        m.insert_knot(1, 0.6).unwrap();
        let h = GeometryMap::Nurbs(m);
        for &(x, y) in &[(0.1, 0.2), (0.35, 0.9), (0.77, 0.5), (1.0, 1.0)] {
            assert!(close(
                g.map_eval([x, y]).unwrap().point,
                h.map_eval([x, y]).unwrap().point,
                1e-13
            ));
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = quarter_annulus();
        let d = 1e-6;
        for &(x, y) in &[(0.2, 0.3), (0.5, 0.5), (0.9, 0.1)] {
            let e = g.map_eval([x, y]).unwrap();
            for c in 0..2 {
                let mut a = [x, y];
                let mut b = [x, y];
                a[c] += d;
                b[c] -= d;
                let pa = g.map_eval(a).unwrap().point;
                let pb = g.map_eval(b).unwrap().point;
                for r in 0..2 {
                    let fd = (pa[r] - pb[r]) / (2.0 * d);
                    assert!((fd - e.jac[r][c]).abs() < 1e-6 * (1.0 + fd.abs()));
                }
            }
        }
    }

    #[test]
    fn c0_annulus_is_continuous_with_a_kink() {
        let g = c0_quarter_annulus();
        assert_eq!(g.kink_lines(0), vec![0.75]);
        g.check_bijective(100).unwrap();
        for i in 0..=10 {
            let eta = i as f64 / 10.0;
            let l = g.eval_anchored([0.75, eta], [0.7, eta]).unwrap().point;
            let r = g.eval_anchored([0.75, eta], [0.8, eta]).unwrap().point;
            assert!(close(l, r, 1e-12));
        }
        let jl = g.eval_anchored([0.75, 0.5], [0.7, 0.5]).unwrap().jac;
        let jr = g.eval_anchored([0.75, 0.5], [0.8, 0.5]).unwrap().jac;
        assert!((jl[0][0] - jr[0][0]).hypot(jl[1][0] - jr[1][0]) > 0.01);
    }

    #[test]
    fn c0_edit_on_middle_row_folds_the_map() {
        let GeometryMap::Nurbs(mut m) = quarter_annulus() else {
            unreachable!()
        };
        m.insert_knot(0, 0.75).unwrap();
        m.insert_knot(0, 0.75).unwrap();
        m.control_point_mut(2, 1)[1] = 0.5;
        assert!(GeometryMap::Nurbs(m).check_bijective(100).is_err());
    }

    #[test]
    fn pushforward_normals() {
        let e = GeometryMap::Identity.map_eval([0.5, 0.5]).unwrap();
        let f = boundary_pushforward(&e, [1.0, 0.0], false).unwrap();
        assert_eq!(f.normal, [0.0, 1.0]);
        assert_eq!(f.weight, 1.0);
        let a = GeometryMap::affine([0.0, 0.0], [3.0, 3.0])
            .unwrap()
            .map_eval([0.5, 0.5])
            .unwrap();
        let f = boundary_pushforward(&a, [1.0, 0.0], false).unwrap();
        assert_eq!(f.normal, [0.0, 1.0]);
        assert_eq!(f.weight, 3.0);
        // parametric bottom edge with the square above it maps to the inner rim
        let g = quarter_annulus();
        let e = g.map_eval([0.3, 0.0]).unwrap();
        assert!(e.det < 0.0);
        let f = boundary_pushforward(&e, [1.0, 0.0], true).unwrap();
        let r = e.point[0].hypot(e.point[1]);
        assert!(close(f.normal, [-e.point[0] / r, -e.point[1] / r], 1e-10));
    }
}
