use faer::{Mat, Side};

use crate::{Error, Result};

/// Relative threshold below which eigen-directions of `B` are dropped.
pub const PENCIL_DEFLATION: f64 = 1e-12;

fn sym_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    let mut ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// All eigenvalues of the pencil `A x = λ B x` on the subspace where `B` is
/// numerically nondegenerate, ascending.
///
/// The pencil is first congruence-scaled by `diag(B)^{-1/2}`, which leaves the
/// eigenvalues unchanged, so that basis functions with tiny support are not
/// mistaken for null directions of `B`.
pub fn gen_eigenvalues(a: &Mat<f64>, b: &Mat<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if b.nrows() != n || a.ncols() != n || b.ncols() != n {
        return Err(Error::InvalidArgument(
            "pencil matrices must be square and equal-sized".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Numerical("empty pencil".into()));
    }
    let d: Vec<f64> = (0..n)
        .map(|i| {
            if b[(i, i)] > 0.0 {
                1.0 / b[(i, i)].sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let a = Mat::from_fn(n, n, |i, j| d[i] * a[(i, j)] * d[j]);
    let b = Mat::from_fn(n, n, |i, j| d[i] * b[(i, j)] * d[j]);
    let eig = b
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let smax = (0..n).map(|i| s[i]).fold(0.0, f64::max);
    if !(smax > 0.0) {
        return Err(Error::Numerical("B is numerically zero".into()));
    }
    let keep: Vec<usize> = (0..n)
        .filter(|&i| s[i] >= PENCIL_DEFLATION * smax)
        .collect();
    let t = Mat::from_fn(n, keep.len(), |r, c| u[(r, keep[c])] / s[keep[c]].sqrt());
    let at = &a * &t;
    let red = t.transpose() * at;
    let red = Mat::from_fn(keep.len(), keep.len(), |i, j| {
        0.5 * (red[(i, j)] + red[(j, i)])
    });
    sym_eigenvalues(&red)
}

/// `(λ_min, λ_max)` of `A x = λ B x`, see [`gen_eigenvalues`].
pub fn gen_eig_extremes_dense(a: &Mat<f64>, b: &Mat<f64>) -> Result<(f64, f64)> {
    let ev = gen_eigenvalues(a, b)?;
    Ok((ev[0], ev[ev.len() - 1]))
}

/// Spectral condition number `max|λ| / min|λ|` of a symmetric matrix,
/// optionally after symmetric diagonal scaling `D^{-1/2} A D^{-1/2}` with
/// `D = |diag(A)|`.
pub fn condition_number_dense(a: &Mat<f64>, jacobi: bool) -> Result<f64> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::Numerical("empty matrix".into()));
    }
    let m = if jacobi {
        let mut d = Vec::with_capacity(n);
        for i in 0..n {
            let v = a[(i, i)];
            if !(v.abs() > 0.0) {
                return Err(Error::Numerical(format!("zero diagonal entry at {i}")));
            }
            d.push(1.0 / v.abs().sqrt());
        }
        Mat::from_fn(n, n, |i, j| d[i] * a[(i, j)] * d[j])
    } else {
        a.clone()
    };
    let ev = sym_eigenvalues(&m)?;
    let amax = ev.iter().fold(0.0f64, |x, v| x.max(v.abs()));
    let amin = ev.iter().fold(f64::INFINITY, |x, v| x.min(v.abs()));
    if !(amin > 0.0) {
        return Err(Error::Numerical("matrix is singular".into()));
    }
    Ok(amax / amin)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> Mat<f64> {
        Mat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { 0.0 })
    }

    #[test]
    fn pencil_with_itself_is_one() {
        let b = Mat::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.5 });
        let (lo, hi) = gen_eig_extremes_dense(&b, &b).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_pencil() {
        let (lo, hi) = gen_eig_extremes_dense(&diag(&[1.0, 4.0]), &diag(&[1.0, 1.0])).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 4.0).abs() < 1e-12);
    }

    #[test]
    fn singular_b_direction_is_deflated() {
        let (lo, hi) = gen_eig_extremes_dense(&diag(&[3.0, 1e6]), &diag(&[1.0, 0.0])).unwrap();
        assert!((lo - 3.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn condition_of_diagonal() {
        assert!(
            (condition_number_dense(&diag(&[1.0, 100.0]), false).unwrap() - 100.0).abs() < 1e-10
        );
        assert!((condition_number_dense(&diag(&[1.0, 100.0]), true).unwrap() - 1.0).abs() < 1e-12);
        assert!(condition_number_dense(&diag(&[1.0, 0.0]), true).is_err());
    }
}
