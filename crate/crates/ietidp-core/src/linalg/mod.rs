//! Minimal sparse/dense linear algebra for the solver: compressed-row
//! storage, direct factorizations for SPD and saddle-point systems, and a
//! preconditioned conjugate gradient solver with a Lanczos condition-number
//! estimate.

mod cholesky;
mod dense;
mod pcg;
mod sparse;

pub use cholesky::{factor_spd, reverse_cuthill_mckee, SpdCholesky};
pub use dense::{factor_symmetric_indefinite, DenseLu, DenseMatrix};
pub use pcg::{pcg, tridiag_eigs, PcgOutcome};
pub use sparse::{SparseMatrix, TripletBuffer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotSpd { index: usize, pivot: f64 },
    #[error("matrix is singular to working precision (column {0})")]
    RankDeficient(usize),
    #[error("operator is not positive definite on the Krylov space (p'Ap = {0})")]
    IndefiniteOperator(f64),
    #[error("empty input")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    crate::math::sqrt(dot(a, a))
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for i in 0..x.len() {
        y[i] += alpha * x[i];
    }
}
