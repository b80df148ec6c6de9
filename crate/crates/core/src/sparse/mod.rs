//! Sparse and dense linear-algebra kernels.

mod csr;
mod dense;
mod lu;
mod matrix_market;
mod vector;

pub use csr::{triple_product, CsrMatrix, DROP_TOLERANCE};
pub use dense::{DenseMatrix, Scalar};
pub use lu::{lu_factor, LuFactorization, Precision};
pub use matrix_market::{read_matrix_market, write_matrix_market};
pub use vector::{dot, norm2};

pub(crate) use vector::{all_finite, axpy, dot_unchecked, scale};
