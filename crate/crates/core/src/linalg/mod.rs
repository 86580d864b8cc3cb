//! Dense linear algebra over [`Real`](crate::Real) scalars.

mod cholesky;
mod decomp;
mod eigen;
mod matrix;

pub use cholesky::{Cholesky, NotPositiveDefinite};
pub use decomp::{determinant, orthogonal_complement, singular_values, RowEchelon};
pub use eigen::{NoConvergence, SymmetricEigen};
pub use matrix::{add_vec, axpy, dot, norm2, scaled, sub_vec, Matrix};
