//! Compressed sparse row storage with a triplet builder.

use alloc::vec;
use alloc::vec::Vec;

/// CSR matrix; column indices are strictly increasing within each row and
/// duplicates have been summed away.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut buf = TripletBuffer::new(nrows, ncols);
        for (r, c, v) in triplets {
            buf.push(r, c, v);
        }
        buf.compress()
    }

    pub fn from_dense(dense: &super::DenseMatrix) -> Self {
        let mut buf = TripletBuffer::new(dense.nrows(), dense.ncols());
        for r in 0..dense.nrows() {
            for c in 0..dense.ncols() {
                let v = dense.get(r, c);
                if v != 0.0 {
                    buf.push(r, c, v);
                }
            }
        }
        buf.compress()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for k in 0..cols.len() {
                acc += vals[k] * x[cols[k]];
            }
            y[r] = acc;
        }
    }

    /// `y += alpha * A x`
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for k in 0..cols.len() {
                acc += vals[k] * x[cols[k]];
            }
            y[r] += alpha * acc;
        }
    }

    /// `y += alpha * A' x`
    pub fn matvec_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let xr = alpha * x[r];
            for k in 0..cols.len() {
                y[cols[k]] += vals[k] * xr;
            }
        }
    }

    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for k in 0..cols.len() {
                d.set(r, cols[k], vals[k]);
            }
        }
        d
    }

    /// Quadratic form `x' A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut row = 0.0;
            for k in 0..cols.len() {
                row += vals[k] * y[cols[k]];
            }
            acc += x[r] * row;
        }
        acc
    }
}

/// Accumulates (row, col, value) entries and compresses them into CSR with a
/// deterministic counting sort, summing duplicates.
#[derive(Debug, Clone)]
pub struct TripletBuffer {
    nrows: usize,
    ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TripletBuffer {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.nrows && c < self.ncols);
        self.rows.push(r);
        self.cols.push(c);
        self.vals.push(v);
    }

    pub fn compress(self) -> SparseMatrix {
        let nnz_in = self.vals.len();
        let mut counts = vec![0usize; self.nrows + 1];
        for &r in &self.rows {
            counts[r + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        // bucket by row, preserving insertion order within the row
        let mut by_row_cols = vec![0usize; nnz_in];
        let mut by_row_vals = vec![0.0; nnz_in];
        let mut cursor = counts.clone();
        for k in 0..nnz_in {
            let r = self.rows[k];
            by_row_cols[cursor[r]] = self.cols[k];
            by_row_vals[cursor[r]] = self.vals[k];
            cursor[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(nnz_in);
        let mut values = Vec::with_capacity(nnz_in);
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            let lo = counts[r];
            let hi = counts[r + 1];
            order.clear();
            order.extend(lo..hi);
            order.sort_by_key(|&k| by_row_cols[k]);
            let mut i = 0;
            while i < order.len() {
                let c = by_row_cols[order[i]];
                let mut v = by_row_vals[order[i]];
                let mut j = i + 1;
                while j < order.len() && by_row_cols[order[j]] == c {
                    v += by_row_vals[order[j]];
                    j += 1;
                }
                col_idx.push(c);
                values.push(v);
                i = j;
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}
