use crate::{Error, Result};

const KNOT_TOL: f64 = 1e-14;

/// A p-open knot vector on `[0, 1]`.
///
/// The first and last knots are repeated `p + 1` times. Internal knots may be
/// repeated up to `p + 1` times; a multiplicity `m` leaves `p - m` continuous
/// derivatives at that breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
    breaks: Vec<f64>,
}

/// Nonzero basis functions at a point: `ders[k][j]` is the k-th derivative of
/// basis `first + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub first: usize,
    pub ders: Vec<Vec<f64>>,
}

impl BasisEval {
    pub fn values(&self) -> &[f64] {
        &self.ders[0]
    }
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidKnots("degree must be at least 1".into()));
        }
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::InvalidKnots(format!(
                "{} knots are too few for degree {p}",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnots("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be nondecreasing".into()));
        }
        let m = knots.len();
        if knots[..=p].iter().any(|&k| k != 0.0) || knots[m - p - 1..].iter().any(|&k| k != 1.0) {
            return Err(Error::InvalidKnots(
                "knot vector must be open: p+1 zeros and p+1 ones".into(),
            ));
        }
        if knots[p + 1] == 0.0 || knots[m - p - 2] == 1.0 {
            return Err(Error::InvalidKnots(
                "end knots repeated more than p+1 times".into(),
            ));
        }
        let mut breaks = vec![knots[0]];
        let mut run = 1usize;
        for w in knots.windows(2) {
            if w[1] > w[0] {
                breaks.push(w[1]);
                run = 1;
            } else {
                run += 1;
                if w[0] > 0.0 && w[0] < 1.0 && run > p + 1 {
                    return Err(Error::InvalidKnots(format!(
                        "internal knot {} repeated more than p+1 times",
                        w[0]
                    )));
                }
            }
        }
        Ok(Self {
            degree,
            knots,
            breaks,
        })
    }

    /// Builds an open knot vector from breakpoints and per-breakpoint internal
    /// multiplicities (`mults.len() == breaks.len() - 2`).
    pub fn from_breakpoints(degree: usize, breaks: &[f64], mults: &[usize]) -> Result<Self> {
        check_breakpoints(breaks)?;
        if mults.len() + 2 != breaks.len() {
            return Err(Error::InvalidKnots(format!(
                "expected {} internal multiplicities, got {}",
                breaks.len() - 2,
                mults.len()
            )));
        }
        let mut knots = vec![0.0; degree + 1];
        for (b, &m) in breaks[1..breaks.len() - 1].iter().zip(mults) {
            if m == 0 || m > degree {
                return Err(Error::InvalidKnots(format!(
                    "multiplicity {m} at {b} outside 1..={degree}"
                )));
            }
            knots.extend(std::iter::repeat_n(*b, m));
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Distinct knot values `Z`, including 0 and 1.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn num_elements(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn multiplicity(&self, x: f64) -> usize {
        self.knots
            .iter()
            .filter(|&&k| (k - x).abs() <= KNOT_TOL)
            .count()
    }

    /// Element containing `x`, right-continuous, with `x = 1` in the last element.
    pub fn element_of(&self, x: f64) -> usize {
        let ne = self.num_elements();
        match self.breaks.partition_point(|&b| b <= x) {
            0 => 0,
            k => (k - 1).min(ne - 1),
        }
    }

    /// Knot span index `s` with `knots[s] <= x < knots[s + 1]`; `x = 1` maps to
    /// the last nonempty span.
    pub fn find_span(&self, x: f64) -> usize {
        let n = self.num_basis();
        if x >= self.knots[n] {
            return n - 1;
        }
        let k = self.knots.partition_point(|&t| t <= x);
        (k - 1).max(self.degree)
    }

    /// Span index of element `e` (the span whose left knot is `breaks[e]`).
    pub fn element_span(&self, e: usize) -> usize {
        let left = self.breaks[e];
        self.knots.partition_point(|&t| t <= left) - 1
    }

    /// Index of the first nonzero basis function on element `e`.
    pub fn element_first_basis(&self, e: usize) -> usize {
        self.element_span(e) - self.degree
    }

    /// Basis values and derivatives up to `max_order` at `x`.
    pub fn eval_basis(&self, x: f64, max_order: usize) -> Result<BasisEval> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let span = self.find_span(x);
        Ok(self.eval_in_span(span, x, max_order))
    }

    /// Evaluates the polynomial piece of span `span` at `x`. `x` may lie
    /// outside the span, which extrapolates that piece.
    pub fn eval_in_span(&self, span: usize, x: f64, max_order: usize) -> BasisEval {
        let p = self.degree;
        let u = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let nd = max_order.min(p);
        let mut ders = vec![vec![0.0; p + 1]; max_order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nd {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize {
                    k - 1
                } else {
                    p - r
                };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for (k, row) in ders.iter_mut().enumerate().skip(1).take(nd) {
            for v in row.iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        BasisEval {
            first: span - p,
            ders,
        }
    }

    /// Evaluates a spline with the given coefficients at `x`.
    pub fn eval_spline(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        let b = self.eval_basis(x, 0)?;
        Ok(b.ders[0]
            .iter()
            .enumerate()
            .map(|(j, v)| v * coeffs[b.first + j])
            .sum())
    }

    /// Greville abscissae (knot averages).
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.num_basis())
            .map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }

    /// Support interval of basis function `i`.
    pub fn support(&self, i: usize) -> (f64, f64) {
        (self.knots[i], self.knots[i + self.degree + 1])
    }
}

fn check_breakpoints(breaks: &[f64]) -> Result<()> {
    if breaks.len() < 2 {
        return Err(Error::InvalidKnots("need at least two breakpoints".into()));
    }
    if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
        return Err(Error::InvalidKnots(
            "breakpoints must start at 0 and end at 1".into(),
        ));
    }
    if breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidKnots(
            "breakpoints must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Open knot vector with `C^continuity` at every internal breakpoint.
pub fn make_open_knot_vector(
    breaks: &[f64],
    degree: usize,
    continuity: usize,
) -> Result<KnotVector> {
    if degree == 0 {
        return Err(Error::InvalidKnots("degree must be at least 1".into()));
    }
    if continuity + 1 > degree {
        return Err(Error::InvalidKnots(format!(
            "continuity {continuity} must lie in 0..={}",
            degree - 1
        )));
    }
    check_breakpoints(breaks)?;
    let mults = vec![degree - continuity; breaks.len() - 2];
    KnotVector::from_breakpoints(degree, breaks, &mults)
}

/// Inserts `xbar` once into a scalar spline.
pub fn insert_knot(kv: &KnotVector, coeffs: &[f64], xbar: f64) -> Result<(KnotVector, Vec<f64>)> {
    insert_knot_points(kv, coeffs, 1, xbar)
}

/// Boehm insertion for coefficients stored row-major with `dim` components
/// per basis function.
pub fn insert_knot_points(
    kv: &KnotVector,
    coeffs: &[f64],
    dim: usize,
    xbar: f64,
) -> Result<(KnotVector, Vec<f64>)> {
    let n = kv.num_basis();
    if coeffs.len() != n * dim {
        return Err(Error::InvalidArgument(format!(
            "expected {} coefficients, got {}",
            n * dim,
            coeffs.len()
        )));
    }
    if !(xbar > 0.0 && xbar < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "inserted knot {xbar} must lie strictly inside (0, 1)"
        )));
    }
    let p = kv.degree;
    if kv.multiplicity(xbar) + 1 > p + 1 {
        return Err(Error::InvalidArgument(format!(
            "inserting {xbar} would exceed multiplicity p+1"
        )));
    }
    let u = &kv.knots;
    let s = kv.find_span(xbar);
    let mut out = vec![0.0; (n + 1) * dim];
    for i in 0..=n {
        let dst = &mut out[i * dim..(i + 1) * dim];
        if i + p <= s {
            dst.copy_from_slice(&coeffs[i * dim..(i + 1) * dim]);
        } else if i > s {
            dst.copy_from_slice(&coeffs[(i - 1) * dim..i * dim]);
        } else {
            let alpha = (xbar - u[i]) / (u[i + p] - u[i]);
            for c in 0..dim {
                dst[c] = alpha * coeffs[i * dim + c] + (1.0 - alpha) * coeffs[(i - 1) * dim + c];
            }
        }
    }
    let mut knots = u.clone();
    knots.insert(s + 1, xbar);
    Ok((KnotVector::new(p, knots)?, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n_el: usize, p: usize, k: usize) -> KnotVector {
        let br: Vec<f64> = (0..=n_el).map(|i| i as f64 / n_el as f64).collect();
        make_open_knot_vector(&br, p, k).unwrap()
    }

    #[test]
    fn linear_single_element() {
        let kv = make_open_knot_vector(&[0.0, 1.0], 1, 0).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(kv.num_basis(), 2);
        let b = kv.eval_basis(0.5, 0).unwrap();
        assert_eq!(b.values(), &[0.5, 0.5]);
    }

    #[test]
    fn quadratic_c1_knot() {
        let kv = make_open_knot_vector(&[0.0, 0.5, 1.0], 2, 1).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]);
        assert_eq!(kv.num_basis(), 4);
    }

    #[test]
    fn bernstein_values_for_single_quadratic_element() {
        let kv = make_open_knot_vector(&[0.0, 1.0], 2, 0).unwrap();
        let b = kv.eval_basis(0.5, 0).unwrap();
        for (v, e) in b.values().iter().zip([0.25, 0.5, 0.25]) {
            assert!((v - e).abs() < 1e-15);
        }
    }

    #[test]
    fn curry_schoenberg_dimension() {
        for n_el in 1..7 {
            for p in 1..5 {
                for k in 0..p {
                    let kv = uniform(n_el, p, k);
                    assert_eq!(kv.num_basis(), (n_el - 1) * (p - k) + p + 1);
                }
            }
        }
    }

    #[test]
    fn eps_mesh_dimension_is_35() {
        let kv = uniform(32, 3, 2);
        let mut knots = kv.knots().to_vec();
        for k in knots.iter_mut() {
            if (*k - 0.75).abs() < 1e-15 {
                *k = 0.757 - 1e-4;
            }
        }
        let kv = KnotVector::new(3, knots).unwrap();
        assert_eq!(kv.num_basis(), 35);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_open_knot_vector(&[0.0, 0.6, 0.5, 1.0], 2, 1).is_err());
        assert!(make_open_knot_vector(&[0.0, 0.5, 1.0], 2, 2).is_err());
        assert!(make_open_knot_vector(&[0.1, 1.0], 2, 0).is_err());
        let kv = uniform(2, 2, 1);
        assert!(matches!(kv.eval_basis(1.5, 0), Err(Error::OutOfDomain(_))));
        assert!(insert_knot(&kv, &[0.0; 4], 0.0).is_err());
        assert!(insert_knot(&kv, &[0.0; 4], 1.0).is_err());
    }

    #[test]
    fn last_basis_is_one_at_right_end() {
        let kv = uniform(5, 3, 2);
        let b = kv.eval_basis(1.0, 0).unwrap();
        assert_eq!(b.first + 3, kv.num_basis() - 1);
        assert!((b.values()[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_insertion_example() {
        let kv = make_open_knot_vector(&[0.0, 1.0], 1, 0).unwrap();
        let (kv2, c) = insert_knot(&kv, &[0.0, 1.0], 0.25).unwrap();
        assert_eq!(kv2.knots(), &[0.0, 0.0, 0.25, 1.0, 1.0]);
        for (a, b) in c.iter().zip([0.0, 0.25, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn insertion_up_to_discontinuity() {
        let kv = uniform(3, 2, 1);
        let coeffs = [0.3, -1.0, 2.0, 0.5, 1.5];
        let (k1, c1) = insert_knot(&kv, &coeffs, 1.0 / 3.0).unwrap();
        let (k2, c2) = insert_knot(&k1, &c1, 1.0 / 3.0).unwrap();
        assert_eq!(k2.multiplicity(1.0 / 3.0), 3);
        assert!(insert_knot(&k2, &c2, 1.0 / 3.0).is_err());
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            if (x - 1.0 / 3.0).abs() < 1e-12 {
                continue;
            }
            let a = kv.eval_spline(&coeffs, x).unwrap();
            let b = k2.eval_spline(&c2, x).unwrap();
            assert!((a - b).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn greville_of_linear_space_are_knots() {
        let kv = uniform(4, 1, 0);
        assert_eq!(kv.greville(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn element_lookup_is_right_continuous() {
        let kv = uniform(4, 2, 1);
        assert_eq!(kv.element_of(0.25), 1);
        assert_eq!(kv.element_of(0.2499), 0);
        assert_eq!(kv.element_of(1.0), 3);
        assert_eq!(kv.element_first_basis(0), 0);
        assert_eq!(kv.element_first_basis(3), 3);
    }
}
