//! Trimmed isogeometric Poisson solver.
//!
//! The crate discretizes `-Δu = f` on a trimmed spline patch with tensor-product
//! B-splines, imposes Dirichlet data weakly on the trimmed boundary with a
//! symmetric Nitsche formulation, and replaces the normal flux on badly cut
//! elements by an extension from a well-cut neighbor, either in the parametric
//! domain or through a physical L² projection.
//!
//! Layout:
//! - [`spline`]: knot vectors, basis evaluation, knot insertion, Bézier extraction,
//!   tensor spaces and a global L² projector.
//! - [`geometry`]: parametric-to-physical maps (identity, affine, NURBS annuli).
//! - [`trimming`]: trim regions, cut-cell quadrature, classification, neighbors.
//! - [`stabilization`]: flux operators and the local stability constant.
//! - [`assembly`]: system assembly, boundary conditions, solvers, spectra, norms.
//! - [`experiments`]: configs, manufactured solutions, sweeps and CSV output.

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod quadrature;
pub mod spline;
pub mod stabilization;
pub mod trimming;

pub use error::{Error, Result};
