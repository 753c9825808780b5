use super::bernstein::bernstein_ders;
use super::knot_vector::{insert_knot_points, make_open_knot_vector, KnotVector};
use crate::{Error, Result};

/// Index of a Bézier cell, lexicographic with the first direction fastest.
pub type CellId = usize;

/// Spline coefficients, lexicographic over `(i1, i2)` with `i1` fastest.
pub type SplineCoefficients = Vec<f64>;

/// Tensor-product spline space of uniform degree on `[0, 1]²`.
#[derive(Debug, Clone)]
pub struct TensorSplineSpace {
    kv: [KnotVector; 2],
    // Per direction and element: (p+1)×(p+1) row-major map from the local
    // B-spline coefficients to Bernstein coefficients.
    extraction: [Vec<Vec<f64>>; 2],
}

/// Nonzero basis functions of one cell evaluated at a point.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
    /// Parametric gradients.
    pub grads: Vec<[f64; 2]>,
}

/// Per-cell map from local spline coefficients to tensor Bernstein coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionOperator {
    pub cell: CellId,
    pub degree: usize,
    pub bounds: [[f64; 2]; 2],
    /// `(p+1)² × (p+1)²`, row-major, rows indexed by Bernstein index
    /// `k1 + (p+1) k2`, columns by local index `a + (p+1) b`.
    pub matrix: Vec<f64>,
}

impl ExtractionOperator {
    pub fn local_len(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn apply(&self, local: &[f64]) -> Vec<f64> {
        let n = self.local_len();
        (0..n)
            .map(|k| (0..n).map(|l| self.matrix[k * n + l] * local[l]).sum())
            .collect()
    }

    /// Tensor Bernstein basis of this cell (continued outside the cell) at a
    /// parametric point: values and parametric gradients, indexed like the
    /// Bernstein coefficients.
    pub fn bernstein_basis(&self, xi: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let p = self.degree;
        let hx = self.bounds[0][1] - self.bounds[0][0];
        let hy = self.bounds[1][1] - self.bounds[1][0];
        let bx = bernstein_ders(p, (xi[0] - self.bounds[0][0]) / hx, 1);
        let by = bernstein_ders(p, (xi[1] - self.bounds[1][0]) / hy, 1);
        let n = p + 1;
        let mut vals = vec![0.0; n * n];
        let mut grads = vec![[0.0; 2]; n * n];
        for k2 in 0..n {
            for k1 in 0..n {
                let k = k1 + n * k2;
                vals[k] = bx[0][k1] * by[0][k2];
                grads[k] = [bx[1][k1] * by[0][k2] / hx, bx[0][k1] * by[1][k2] / hy];
            }
        }
        (vals, grads)
    }

    /// Evaluates the Bernstein form with coefficients `bern` at `xi`.
    pub fn eval(&self, bern: &[f64], xi: [f64; 2]) -> (f64, [f64; 2]) {
        let (v, g) = self.bernstein_basis(xi);
        let mut val = 0.0;
        let mut grad = [0.0; 2];
        for k in 0..v.len() {
            val += bern[k] * v[k];
            grad[0] += bern[k] * g[k][0];
            grad[1] += bern[k] * g[k][1];
        }
        (val, grad)
    }
}

impl TensorSplineSpace {
    pub fn new(kv_x: KnotVector, kv_y: KnotVector) -> Result<Self> {
        if kv_x.degree() != kv_y.degree() {
            return Err(Error::InvalidArgument(format!(
                "degrees differ between directions ({} vs {})",
                kv_x.degree(),
                kv_y.degree()
            )));
        }
        let extraction = [extraction_1d(&kv_x)?, extraction_1d(&kv_y)?];
        Ok(Self {
            kv: [kv_x, kv_y],
            extraction,
        })
    }

    /// Uniform `n_el × n_el` grid with `C^continuity` internal knots.
    pub fn uniform(n_el: usize, degree: usize, continuity: usize) -> Result<Self> {
        let br: Vec<f64> = (0..=n_el).map(|i| i as f64 / n_el as f64).collect();
        let kv = make_open_knot_vector(&br, degree, continuity)?;
        Self::new(kv.clone(), kv)
    }

    pub fn degree(&self) -> usize {
        self.kv[0].degree()
    }

    pub fn knot_vector(&self, dir: usize) -> &KnotVector {
        &self.kv[dir]
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.kv[0].num_basis(), self.kv[1].num_basis()]
    }

    pub fn dim(&self) -> usize {
        self.kv[0].num_basis() * self.kv[1].num_basis()
    }

    pub fn grid(&self) -> [usize; 2] {
        [self.kv[0].num_elements(), self.kv[1].num_elements()]
    }

    pub fn num_cells(&self) -> usize {
        let g = self.grid();
        g[0] * g[1]
    }

    pub fn cell_id(&self, j1: usize, j2: usize) -> CellId {
        j1 + self.grid()[0] * j2
    }

    pub fn cell_index(&self, id: CellId) -> [usize; 2] {
        let m1 = self.grid()[0];
        [id % m1, id / m1]
    }

    pub fn dof_index(&self, i1: usize, i2: usize) -> usize {
        i1 + self.dims()[0] * i2
    }

    pub fn dof_pair(&self, dof: usize) -> [usize; 2] {
        let n1 = self.dims()[0];
        [dof % n1, dof / n1]
    }

    pub fn cell_bounds(&self, id: CellId) -> [[f64; 2]; 2] {
        let [j1, j2] = self.cell_index(id);
        let bx = self.kv[0].breakpoints();
        let by = self.kv[1].breakpoints();
        [[bx[j1], bx[j1 + 1]], [by[j2], by[j2 + 1]]]
    }

    pub fn cell_of_point(&self, xi: [f64; 2]) -> CellId {
        self.cell_id(self.kv[0].element_of(xi[0]), self.kv[1].element_of(xi[1]))
    }

    /// Parametric diameter of a cell.
    pub fn cell_diameter(&self, id: CellId) -> f64 {
        let b = self.cell_bounds(id);
        (b[0][1] - b[0][0]).hypot(b[1][1] - b[1][0])
    }

    /// Smallest ratio of a cell's shortest edge to its diameter.
    pub fn shape_regularity(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| {
                let b = self.cell_bounds(c);
                let (hx, hy) = (b[0][1] - b[0][0], b[1][1] - b[1][0]);
                hx.min(hy) / hx.hypot(hy)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Global indices of the `(p+1)²` functions nonzero on a cell, in local order.
    pub fn cell_dofs(&self, id: CellId) -> Vec<usize> {
        let [j1, j2] = self.cell_index(id);
        let f1 = self.kv[0].element_first_basis(j1);
        let f2 = self.kv[1].element_first_basis(j2);
        let n = self.degree() + 1;
        let mut out = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                out.push(self.dof_index(f1 + a, f2 + b));
            }
        }
        out
    }

    /// Cells intersecting the support of a basis function, as index ranges.
    pub fn support_cells(&self, dof: usize) -> [std::ops::Range<usize>; 2] {
        let pair = self.dof_pair(dof);
        let mut out = [0..0, 0..0];
        for d in 0..2 {
            let (lo, hi) = self.kv[d].support(pair[d]);
            let br = self.kv[d].breakpoints();
            let e0 = br.partition_point(|&b| b < lo - 1e-15);
            let e1 = br.partition_point(|&b| b < hi - 1e-15);
            out[d] = e0..e1;
        }
        out
    }

    /// Evaluates the nonzero basis functions of cell `id` at `xi` using that
    /// cell's polynomial pieces (`xi` on the cell boundary is handled by the
    /// cell, not by the right-continuous convention).
    pub fn eval_cell(&self, id: CellId, xi: [f64; 2]) -> CellBasis {
        let [j1, j2] = self.cell_index(id);
        let ex = self.kv[0].eval_in_span(self.kv[0].element_span(j1), xi[0], 1);
        let ey = self.kv[1].eval_in_span(self.kv[1].element_span(j2), xi[1], 1);
        let n = self.degree() + 1;
        let mut dofs = Vec::with_capacity(n * n);
        let mut values = Vec::with_capacity(n * n);
        let mut grads = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                dofs.push(self.dof_index(ex.first + a, ey.first + b));
                values.push(ex.ders[0][a] * ey.ders[0][b]);
                grads.push([ex.ders[1][a] * ey.ders[0][b], ex.ders[0][a] * ey.ders[1][b]]);
            }
        }
        CellBasis {
            dofs,
            values,
            grads,
        }
    }

    /// Spline value and parametric gradient at a point.
    pub fn eval(&self, coeffs: &[f64], xi: [f64; 2]) -> Result<(f64, [f64; 2])> {
        if !(0.0..=1.0).contains(&xi[0]) {
            return Err(Error::OutOfDomain(xi[0]));
        }
        if !(0.0..=1.0).contains(&xi[1]) {
            return Err(Error::OutOfDomain(xi[1]));
        }
        Ok(self.eval_in_cell(coeffs, self.cell_of_point(xi), xi))
    }

    pub fn eval_in_cell(&self, coeffs: &[f64], id: CellId, xi: [f64; 2]) -> (f64, [f64; 2]) {
        let cb = self.eval_cell(id, xi);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (l, &d) in cb.dofs.iter().enumerate() {
            v += coeffs[d] * cb.values[l];
            g[0] += coeffs[d] * cb.grads[l][0];
            g[1] += coeffs[d] * cb.grads[l][1];
        }
        (v, g)
    }

    pub fn extraction(&self, id: CellId) -> ExtractionOperator {
        let [j1, j2] = self.cell_index(id);
        let n = self.degree() + 1;
        let e1 = &self.extraction[0][j1];
        let e2 = &self.extraction[1][j2];
        let nn = n * n;
        let mut matrix = vec![0.0; nn * nn];
        for k2 in 0..n {
            for k1 in 0..n {
                let k = k1 + n * k2;
                for b in 0..n {
                    for a in 0..n {
                        matrix[k * nn + a + n * b] = e1[k1 * n + a] * e2[k2 * n + b];
                    }
                }
            }
        }
        ExtractionOperator {
            cell: id,
            degree: self.degree(),
            bounds: self.cell_bounds(id),
            matrix,
        }
    }
}

/// Bézier extraction operators for every cell of a space.
pub fn bezier_extract(space: &TensorSplineSpace) -> Vec<ExtractionOperator> {
    (0..space.num_cells())
        .map(|c| space.extraction(c))
        .collect()
}

// Inserts every internal breakpoint up to multiplicity p on the identity
// coefficient matrix; the refined coefficients of basis j are then its
// Bernstein coefficients element by element.
fn extraction_1d(kv: &KnotVector) -> Result<Vec<Vec<f64>>> {
    let p = kv.degree();
    let n = kv.num_basis();
    let mut coeffs = vec![0.0; n * n];
    for i in 0..n {
        coeffs[i * n + i] = 1.0;
    }
    let mut refined = kv.clone();
    for &b in &kv.breakpoints()[1..kv.breakpoints().len() - 1] {
        while refined.multiplicity(b) < p {
            let (k, c) = insert_knot_points(&refined, &coeffs, n, b)?;
            refined = k;
            coeffs = c;
        }
    }
    let mut out = Vec::with_capacity(kv.num_elements());
    for e in 0..kv.num_elements() {
        let row0 = refined.element_first_basis(e);
        let col0 = kv.element_first_basis(e);
        let mut m = vec![0.0; (p + 1) * (p + 1)];
        for k in 0..=p {
            for a in 0..=p {
                m[k * (p + 1) + a] = coeffs[(row0 + k) * n + col0 + a];
            }
        }
        out.push(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element_extraction_is_identity() {
        let space = TensorSplineSpace::uniform(1, 3, 2).unwrap();
        let e = space.extraction(0);
        let n = e.local_len();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((e.matrix[i * n + j] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn linear_c0_extraction_duplicates_shared_coefficient() {
        let kv = make_open_knot_vector(&[0.0, 0.5, 1.0], 1, 0).unwrap();
        let ex = extraction_1d(&kv).unwrap();
        assert_eq!(ex[0], vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(ex[1], vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(kv.element_first_basis(1), 1);
    }

    #[test]
    fn cell_dofs_are_lexicographic() {
        let space = TensorSplineSpace::uniform(4, 2, 1).unwrap();
        assert_eq!(space.dims(), [6, 6]);
        let c = space.cell_id(1, 2);
        let d = space.cell_dofs(c);
        assert_eq!(d[0], space.dof_index(1, 2));
        assert_eq!(d[1], space.dof_index(2, 2));
        assert_eq!(d[3], space.dof_index(1, 3));
    }

    #[test]
    fn support_cells_cover_the_support() {
        let space = TensorSplineSpace::uniform(8, 3, 2).unwrap();
        for dof in [0, 5, 17, space.dim() - 1] {
            let [rx, ry] = space.support_cells(dof);
            for c in 0..space.num_cells() {
                let [j1, j2] = space.cell_index(c);
                let inside = rx.contains(&j1) && ry.contains(&j2);
                assert_eq!(
                    inside,
                    space.cell_dofs(c).contains(&dof),
                    "dof {dof} cell {c}"
                );
            }
        }
    }

    #[test]
    fn shape_regularity_of_square_grid() {
        let space = TensorSplineSpace::uniform(4, 2, 1).unwrap();
        assert!((space.shape_regularity() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
