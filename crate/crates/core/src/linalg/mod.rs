//! Dense and sparse numerical kernels.
//!
//! Dense matrices are `nalgebra::DMatrix<f64>` (column-major). Sparse matrices
//! use the compressed-row [`CsrMatrix`] defined here. Everything else in the crate
//! is built on the contracts of [`thin_svd`], [`solve_dense`] and [`spmv`].

mod lu;
mod sparse;
mod svd;

pub use lu::{solve_dense, LuFactor};
pub use sparse::{spmv, CsrMatrix, SparseLu};
pub use svd::{economy_svd, householder_qr, householder_qr_owned, thin_svd, thin_svd_owned, QrFactor, SvdResult};

use std::cell::Cell;

/// Column-major dense matrix of 64-bit floats.
pub type DenseMatrix = nalgebra::DMatrix<f64>;

thread_local! {
    static SVD_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of SVD factorizations started on the current thread.
///
/// Used by the reduced solver to assert that no offline work leaks into timed
/// online sections.
pub fn svd_call_count() -> u64 {
    SVD_CALLS.with(|c| c.get())
}

pub(crate) fn record_svd_call() {
    SVD_CALLS.with(|c| c.set(c.get() + 1));
}

/// Frobenius norm of a dense matrix.
pub fn frobenius(a: &DenseMatrix) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dot product of row `i` of `a` with `x`.
pub fn dot_row(a: &DenseMatrix, i: usize, x: &[f64]) -> f64 {
    x.iter().enumerate().map(|(j, &v)| a[(i, j)] * v).sum()
}
