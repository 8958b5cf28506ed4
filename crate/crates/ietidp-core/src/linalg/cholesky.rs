//! Envelope (skyline) Cholesky factorization with a reverse Cuthill-McKee
//! preordering. Patch-local and merged global stiffness matrices are banded
//! tensor-product problems, so an envelope scheme is adequate at desk scale.

use alloc::vec;
use alloc::vec::Vec;

use super::{LinalgError, SparseMatrix};
use crate::math;

/// Reverse Cuthill-McKee ordering of the adjacency graph of `a`.
/// Returns `perm` with `perm[new] = old`; deterministic tie-breaking by
/// (degree, index).
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|r| a.row(r).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut queue: Vec<usize> = Vec::new();
    let mut nbrs: Vec<usize> = Vec::new();

    loop {
        // seed: unvisited vertex of minimum degree
        let mut seed = None;
        for v in 0..n {
            if !visited[v] && seed.map_or(true, |s: usize| degree[v] < degree[s]) {
                seed = Some(v);
            }
        }
        let Some(seed) = seed else { break };
        visited[seed] = true;
        queue.clear();
        queue.push(seed);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            order.push(v);
            nbrs.clear();
            for &c in a.row(v).0 {
                if c != v && !visited[c] {
                    visited[c] = true;
                    nbrs.push(c);
                }
            }
            nbrs.sort_by_key(|&c| (degree[c], c));
            queue.extend_from_slice(&nbrs);
        }
    }
    order.reverse();
    order
}

/// Cholesky factorization `P A P' = L L'` with envelope storage.
#[derive(Debug, Clone)]
pub struct SpdCholesky {
    n: usize,
    perm: Vec<usize>,
    // row i of L occupies columns first[i]..=i at env[start[i]..start[i+1]]
    first: Vec<usize>,
    start: Vec<usize>,
    env: Vec<f64>,
}

/// Factors a symmetric positive definite matrix given in full symmetric CSR.
pub fn factor_spd(a: &SparseMatrix) -> Result<SpdCholesky, LinalgError> {
    let n = a.nrows();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    debug_assert_eq!(a.ncols(), n);
    let perm = reverse_cuthill_mckee(a);
    let mut iperm = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        iperm[old] = new;
    }

    // envelope profile of the permuted matrix (lower triangle)
    let mut first: Vec<usize> = (0..n).collect();
    for r in 0..n {
        let pr = iperm[r];
        for &c in a.row(r).0 {
            let pc = iperm[c];
            if pc < pr && pc < first[pr] {
                first[pr] = pc;
            }
        }
    }
    let mut start = Vec::with_capacity(n + 1);
    start.push(0usize);
    for i in 0..n {
        start.push(start[i] + (i - first[i] + 1));
    }
    let mut env = vec![0.0; start[n]];
    for r in 0..n {
        let (cols, vals) = a.row(r);
        let pr = iperm[r];
        for k in 0..cols.len() {
            let pc = iperm[cols[k]];
            if pc <= pr {
                env[start[pr] + (pc - first[pr])] += vals[k];
            }
        }
    }

    // in-place envelope factorization
    for i in 0..n {
        for j in first[i]..i {
            let lo = core::cmp::max(first[i], first[j]);
            let mut s = env[start[i] + (j - first[i])];
            for k in lo..j {
                s -= env[start[i] + (k - first[i])] * env[start[j] + (k - first[j])];
            }
            env[start[i] + (j - first[i])] = s / env[start[j] + (j - first[j])];
        }
        let mut d = env[start[i] + (i - first[i])];
        for k in first[i]..i {
            let l = env[start[i] + (k - first[i])];
            d -= l * l;
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(LinalgError::NotSpd {
                index: perm[i],
                pivot: d,
            });
        }
        env[start[i] + (i - first[i])] = math::sqrt(d);
    }

    Ok(SpdCholesky {
        n,
        perm,
        first,
        start,
        env,
    })
}

impl SpdCholesky {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        let mut y = vec![0.0; self.n];
        // forward: L y = P b
        for i in 0..self.n {
            let mut s = b[self.perm[i]];
            for k in self.first[i]..i {
                s -= self.env[self.start[i] + (k - self.first[i])] * y[k];
            }
            y[i] = s / self.env[self.start[i] + (i - self.first[i])];
        }
        // backward: L' z = y
        for i in (0..self.n).rev() {
            let z = y[i] / self.env[self.start[i] + (i - self.first[i])];
            y[i] = z;
            for k in self.first[i]..i {
                y[k] -= self.env[self.start[i] + (k - self.first[i])] * z;
            }
        }
        for i in 0..self.n {
            x[self.perm[i]] = y[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_solve() {
        let a = SparseMatrix::from_triplets(3, 3, [(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]);
        let f = factor_spd(&a).unwrap();
        let x = f.solve(&[1.0, 2.0, 3.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix_rejected() {
        let a = SparseMatrix::from_triplets(1, 1, [(0, 0, 0.0)]);
        assert!(matches!(factor_spd(&a), Err(LinalgError::NotSpd { .. })));
    }

    #[test]
    fn indefinite_rejected() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(factor_spd(&a), Err(LinalgError::NotSpd { .. })));
    }

    #[test]
    fn random_spd_residual() {
        // A = B'B + I with a fixed congruential sequence
        let n = 50;
        let mut state = 0x243F6A8885A308D3u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut b = vec![0.0; n * n];
        for v in b.iter_mut() {
            *v = rnd();
        }
        let mut tri = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += b[k * n + i] * b[k * n + j];
                }
                if i == j {
                    s += 1.0;
                }
                tri.push((i, j, s));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, tri);
        let f = factor_spd(&a).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&rhs);
        let mut ax = vec![0.0; n];
        a.matvec(&x, &mut ax);
        let mut err: f64 = 0.0;
        for i in 0..n {
            err = err.max((ax[i] - rhs[i]).abs());
        }
        assert!(err < 1e-10, "residual {err}");
    }

    #[test]
    fn rcm_is_permutation() {
        let a = SparseMatrix::from_triplets(
            4,
            4,
            [(0, 0, 1.0), (3, 3, 1.0), (1, 1, 1.0), (2, 2, 1.0), (0, 3, 0.5), (3, 0, 0.5)],
        );
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }
}
