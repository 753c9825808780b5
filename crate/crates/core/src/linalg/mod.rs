//! Sparse storage, direct solves and small dense spectral problems.

mod dense;
mod sparse;

pub use dense::{
    condition_number_dense, gen_eig_extremes_dense, gen_eigenvalues, PENCIL_DEFLATION,
};
pub use sparse::{solve_sparse, CsrMatrix, TripletBuilder};
