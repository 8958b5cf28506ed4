//! Dense row-major matrices and an LU factorization with partial pivoting,
//! used for the patch-local saddle-point systems (which are dense once the
//! Schur complement has been formed).

use alloc::vec;
use alloc::vec::Vec;

use super::{LinalgError, SparseMatrix};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn from_rows(nrows: usize, ncols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), nrows * ncols);
        Self { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.ncols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.ncols + c] = v;
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.ncols + c] += v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.ncols..(r + 1) * self.ncols]
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let row = self.row(r);
            let mut acc = 0.0;
            for c in 0..self.ncols {
                acc += row[c] * x[c];
            }
            y[r] = acc;
        }
    }

    /// `y += alpha A' x`
    pub fn matvec_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for r in 0..self.nrows {
            let row = self.row(r);
            let xr = alpha * x[r];
            for c in 0..self.ncols {
                y[c] += row[c] * xr;
            }
        }
    }

    /// Symmetrizes in place: `A <- (A + A') / 2`.
    pub fn symmetrize(&mut self) {
        debug_assert_eq!(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for c in 0..r {
                let v = 0.5 * (self.get(r, c) + self.get(c, r));
                self.set(r, c, v);
                self.set(c, r, v);
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for &v in &self.data {
            m = m.max(math::abs(v));
        }
        m
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    pivots: Vec<usize>,
}

impl DenseLu {
    /// Factors a square matrix; reports the first column whose pivot drops
    /// below `1e-13 * max|A|`, which indicates rank deficiency.
    pub fn factor(a: DenseMatrix) -> Result<Self, LinalgError> {
        let n = a.nrows();
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        assert_eq!(a.ncols(), n);
        let scale = a.max_abs();
        let tol = if scale > 0.0 { 1e-13 * scale } else { 0.0 };
        let mut lu = a.data;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let mut pk = k;
            let mut best = math::abs(lu[k * n + k]);
            for r in (k + 1)..n {
                let v = math::abs(lu[r * n + k]);
                if v > best {
                    best = v;
                    pk = r;
                }
            }
            if !(best > tol) || !best.is_finite() {
                return Err(LinalgError::RankDeficient(k));
            }
            pivots[k] = pk;
            if pk != k {
                for c in 0..n {
                    lu.swap(k * n + c, pk * n + c);
                }
            }
            let pivot = lu[k * n + k];
            for r in (k + 1)..n {
                let m = lu[r * n + k] / pivot;
                lu[r * n + k] = m;
                if m != 0.0 {
                    for c in (k + 1)..n {
                        lu[r * n + c] -= m * lu[k * n + c];
                    }
                }
            }
        }
        Ok(Self { n, lu, pivots })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        let n = self.n;
        // apply the row interchanges in factorization order, then the
        // triangular solves against the stored factors
        for k in 0..n {
            x.swap(k, self.pivots[k]);
        }
        for k in 0..n {
            let xk = x[k];
            if xk != 0.0 {
                for r in (k + 1)..n {
                    x[r] -= self.lu[r * n + k] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let xk = x[k] / self.lu[k * n + k];
            x[k] = xk;
            if xk != 0.0 {
                for r in 0..k {
                    x[r] -= self.lu[r * n + k] * xk;
                }
            }
        }
    }
}

/// Factors a symmetric nonsingular matrix (typically a saddle-point block
/// `[S C'; C 0]`) for repeated solves. The input is densified; patch-local
/// saddle systems are small once the Schur complement is explicit.
pub fn factor_symmetric_indefinite(a: &SparseMatrix) -> Result<DenseLu, LinalgError> {
    DenseLu::factor(a.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_matrix() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.0), (1, 0, 1.0)]);
        let f = factor_symmetric_indefinite(&a).unwrap();
        let x = f.solve(&[1.0, 2.0]);
        assert!((x[0] - 2.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn small_saddle() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0)]);
        let f = factor_symmetric_indefinite(&a).unwrap();
        let x = f.solve(&[3.0, 1.0]);
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(
            factor_symmetric_indefinite(&a),
            Err(LinalgError::RankDeficient(_))
        ));
    }

    #[test]
    fn random_symmetric_residual() {
        let n = 40;
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rnd();
                d.set(i, j, v);
                d.set(j, i, v);
            }
        }
        let a = SparseMatrix::from_dense(&d);
        let f = factor_symmetric_indefinite(&a).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let x = f.solve(&rhs);
        let mut ax = vec![0.0; n];
        d.matvec(&x, &mut ax);
        let mut err: f64 = 0.0;
        for i in 0..n {
            err = err.max((ax[i] - rhs[i]).abs());
        }
        assert!(err < 1e-9, "residual {err}");
    }
}
