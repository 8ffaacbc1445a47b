//! Spectral-gap analysis for isogeometric discretizations of `-u'' = λu` on `(0, 1)`
//! with homogeneous Dirichlet conditions, on reparametrized open uniform meshes.

pub mod assembly;
pub mod bspline;
pub mod eigensolve;
pub mod error;
pub mod quadrature;
pub mod reparam;
pub mod spectral_analysis;
pub mod symbol;

pub use error::{Error, Result};
