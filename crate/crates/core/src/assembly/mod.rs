//! Nitsche system assembly, boundary conditions, solvers, spectra and norms.

mod bc;
mod norms;
mod system;

pub use bc::{apply_strong_bc, deactivate_dofs, edge_interpolant, DEACTIVATION_TOL};
pub use norms::error_norms;
pub use system::{
    assemble, gram_1h, BcKind, FluxField, LinearSystem, ProblemData, ScalarField, WeakBoundary,
};

use crate::linalg::{condition_number_dense, gen_eig_extremes_dense, solve_sparse, CsrMatrix};
use crate::spline::SplineCoefficients;
use crate::{Error, Result};

/// Solves the full system (inactive and constrained rows are identities).
///
/// The system is rescaled symmetrically by `|diag(A)|^{-1/2}` first; basis
/// functions with tiny trimmed support otherwise have entries many orders of
/// magnitude below the rest.
pub fn solve(system: &LinearSystem) -> Result<SplineCoefficients> {
    let d: Vec<f64> = system
        .matrix
        .diagonal()
        .into_iter()
        .map(|v| if v != 0.0 { 1.0 / v.abs().sqrt() } else { 1.0 })
        .collect();
    let scaled = system.matrix.map_values(|i, j, v| d[i] * v * d[j]);
    let rhs: Vec<f64> = system.rhs.iter().zip(&d).map(|(b, s)| b * s).collect();
    let y = solve_sparse(&scaled, &rhs)?;
    Ok(y.iter().zip(&d).map(|(y, s)| y * s).collect())
}

/// Extreme eigenvalues of `A x = λ B x` restricted to the DOFs in `dofs`.
pub fn gen_eig_extremes(a: &CsrMatrix, b: &CsrMatrix, dofs: &[usize]) -> Result<(f64, f64)> {
    if dofs.is_empty() {
        return Err(Error::Numerical("no free DOFs".into()));
    }
    gen_eig_extremes_dense(&a.dense_submatrix(dofs), &b.dense_submatrix(dofs))
}

/// Spectral condition number of `A` restricted to `dofs`, optionally
/// Jacobi-rescaled.
pub fn condition_number(a: &CsrMatrix, dofs: &[usize], jacobi: bool) -> Result<f64> {
    if dofs.is_empty() {
        return Err(Error::Numerical("no free DOFs".into()));
    }
    condition_number_dense(&a.dense_submatrix(dofs), jacobi)
}
