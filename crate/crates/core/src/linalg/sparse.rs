use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::{Error, Result};

/// Accumulates `(row, col, value)` contributions; duplicates are summed in
/// insertion order so the result does not depend on hashing or threads.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, val));
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Square sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let mut t = TripletBuilder::new(a.len());
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.add(i, j, v);
                }
            }
        }
        t.build()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.iter()
            .fold(0.0, |m, (i, j, v)| m.max((v - self.get(j, i)).abs()))
    }

    /// Dense copy of the rows and columns selected by `keep`.
    pub fn dense_submatrix(&self, keep: &[usize]) -> Mat<f64> {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = Mat::zeros(keep.len(), keep.len());
        for (k, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos[j] != usize::MAX {
                    m[(k, pos[j])] = v;
                }
            }
        }
        m
    }

    pub fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[k] = f(i, self.col_idx[k], self.values[k]);
            }
        }
        out
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let trip: Vec<_> = self.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &trip)
            .map_err(|e| Error::Numerical(format!("sparse matrix creation failed: {e:?}")))
    }

    /// Writes 1-based `row col value` lines.
    pub fn write_coordinate(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

/// Direct sparse LU solve with two steps of iterative refinement. Fails if
/// the final residual exceeds `1e-10 · ‖b‖`.
pub fn solve_sparse(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!(
            "rhs length {} != {}",
            b.len(),
            n
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let lu = a
        .to_faer()?
        .sp_lu()
        .map_err(|e| Error::Numerical(format!("sparse LU failed: {e:?}")))?;
    let solve = |r: &[f64]| -> Vec<f64> {
        let rhs = Mat::from_fn(n, 1, |i, _| r[i]);
        let x = lu.solve(&rhs);
        (0..n).map(|i| x[(i, 0)]).collect()
    };
    let mut x = solve(b);
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..3 {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let res = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !res.is_finite() {
            return Err(Error::Numerical("non-finite residual".into()));
        }
        if res <= 1e-14 * norm_b {
            break;
        }
        let dx = solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    let ax = a.matvec(&x);
    let res = b
        .iter()
        .zip(&ax)
        .map(|(bi, ai)| (bi - ai).powi(2))
        .sum::<f64>()
        .sqrt();
    if !(res <= 1e-10 * norm_b) {
        return Err(Error::Numerical(format!(
            "linear solve residual {res:.3e} exceeds tolerance (|b| = {norm_b:.3e})"
        )));
    }
    Ok(x)
}
