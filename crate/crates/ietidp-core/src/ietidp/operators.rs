//! Patch operators and the assembled dual system.
//!
//! Per patch this holds the interior Cholesky factor, the reduced load
//! `g^(k)`, the explicit skeleton Schur complement, the factored saddle
//! matrix `[S C'; C 0]`, and the energy-minimizing basis `Psi^(k)`.
//! Together with the jump matrix, the multiplicity scaling and the factored
//! coarse matrix `S_Pi` these realize the operator `F = F_0 B'`, the right
//! side `d = F_0 g`, and the scaled Dirichlet preconditioner
//! `M_sD = B D^-1 S D^-1 B'`.

use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::PatchSystem;
use crate::linalg::{factor_spd, DenseLu, DenseMatrix, SparseMatrix, SpdCholesky, TripletBuffer};

use super::{CRow, IetiError, JumpMatrix, PrimalConstraints, Scaling, SkeletonIndex};

/// Matrix-free application of the skeleton Schur complement
/// `S = A_GG - A_GI A_II^-1 A_IG` backed by the interior factorization,
/// together with the reduced right side `g = f_G - A_GI A_II^-1 f_I`.
pub struct SchurOperator<'a> {
    system: &'a PatchSystem,
    factor: Option<&'a SpdCholesky>,
}

impl<'a> SchurOperator<'a> {
    pub fn new(system: &'a PatchSystem, factor: Option<&'a SpdCholesky>) -> Self {
        debug_assert_eq!(system.n_interior() == 0, factor.is_none());
        Self { system, factor }
    }

    pub fn apply(&self, w: &[f64], out: &mut [f64]) {
        self.system.a_gg.matvec(w, out);
        if let Some(factor) = self.factor {
            let mut t = vec![0.0; self.system.n_interior()];
            self.system.a_ig.matvec(w, &mut t);
            let y = factor.solve(&t);
            self.system.a_gi.matvec_add(-1.0, &y, out);
        }
    }

    pub fn reduced_load(&self) -> Vec<f64> {
        let mut g = self.system.f_g.clone();
        if let Some(factor) = self.factor {
            let y = factor.solve(&self.system.f_i);
            self.system.a_gi.matvec_add(-1.0, &y, &mut g);
        }
        g
    }
}

/// Everything the dual solver needs from one patch.
#[derive(Debug)]
pub struct PatchOperators {
    pub system: PatchSystem,
    pub a_ii: Option<SpdCholesky>,
    /// explicit skeleton Schur complement
    pub schur: DenseMatrix,
    /// factored `[S C'; C 0]`; absent when the patch has no skeleton DOFs
    saddle: Option<DenseLu>,
    pub n_primal: usize,
    /// global primal id per local constraint row
    pub primal_globals: Vec<usize>,
    /// energy-minimizing basis, `n_skeleton x n_primal`
    pub psi: DenseMatrix,
    pub g: Vec<f64>,
}

impl PatchOperators {
    pub fn build(system: PatchSystem, rows: &[CRow], patch: usize) -> Result<Self, IetiError> {
        let n_i = system.n_interior();
        let n_g = system.n_skeleton();
        let a_ii = if n_i > 0 {
            Some(
                factor_spd(&system.a_ii)
                    .map_err(|source| IetiError::PatchLinalg { patch, source })?,
            )
        } else {
            None
        };

        // g = f_G - A_GI A_II^-1 f_I
        let mut g = system.f_g.clone();
        if let Some(factor) = &a_ii {
            let y = factor.solve(&system.f_i);
            system.a_gi.matvec_add(-1.0, &y, &mut g);
        }

        // dense S = A_GG - A_GI A_II^-1 A_IG, column by column through the
        // interior factorization
        let mut schur = system.a_gg.to_dense();
        if let Some(factor) = &a_ii {
            let mut rhs = vec![0.0; n_i];
            for c in 0..n_g {
                rhs.iter_mut().for_each(|v| *v = 0.0);
                let (cols, vals) = system.a_gi.row(c);
                for k in 0..cols.len() {
                    rhs[cols[k]] = vals[k];
                }
                let y = factor.solve(&rhs);
                for r in 0..n_g {
                    let (cols_r, vals_r) = system.a_gi.row(r);
                    let mut dot = 0.0;
                    for k in 0..cols_r.len() {
                        dot += vals_r[k] * y[cols_r[k]];
                    }
                    schur.add(r, c, -dot);
                }
            }
        }
        schur.symmetrize();

        // saddle [S C'; C 0]
        let nc = rows.len();
        let n = n_g + nc;
        let mut saddle = DenseMatrix::zeros(n, n);
        for r in 0..n_g {
            for c in 0..n_g {
                saddle.set(r, c, schur.get(r, c));
            }
        }
        for (j, row) in rows.iter().enumerate() {
            for (col, w) in row.cols.iter().zip(&row.weights) {
                saddle.set(n_g + j, *col, *w);
                saddle.set(*col, n_g + j, *w);
            }
        }
        let saddle = if n > 0 {
            Some(DenseLu::factor(saddle).map_err(|_| IetiError::SingularSaddle { patch })?)
        } else {
            None
        };

        // Psi columns: saddle solves with right side (0, e_j)
        let mut psi = DenseMatrix::zeros(n_g, nc);
        let mut rhs = vec![0.0; n];
        for j in 0..nc {
            rhs.iter_mut().for_each(|v| *v = 0.0);
            rhs[n_g + j] = 1.0;
            saddle.as_ref().unwrap().solve_in_place(&mut rhs);
            for r in 0..n_g {
                psi.set(r, j, rhs[r]);
            }
        }

        Ok(Self {
            system,
            a_ii,
            schur,
            saddle,
            n_primal: nc,
            primal_globals: rows.iter().map(|r| r.global).collect(),
            psi,
            g,
        })
    }

    pub fn n_skeleton(&self) -> usize {
        self.schur.nrows()
    }

    /// Solves `[S C'; C 0] (w, mu) = (q, 0)` and writes the `w` part.
    pub fn saddle_solve(&self, q: &[f64], w: &mut [f64]) {
        let Some(saddle) = &self.saddle else {
            return;
        };
        let n_g = self.n_skeleton();
        let mut rhs = vec![0.0; n_g + self.n_primal];
        rhs[..n_g].copy_from_slice(q);
        saddle.solve_in_place(&mut rhs);
        w.copy_from_slice(&rhs[..n_g]);
    }

    /// Like [`Self::saddle_solve`], returning the multipliers too.
    pub fn saddle_solve_full(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n_g = self.n_skeleton();
        let Some(saddle) = &self.saddle else {
            return (Vec::new(), Vec::new());
        };
        let mut rhs = vec![0.0; n_g + self.n_primal];
        rhs[..n_g].copy_from_slice(q);
        saddle.solve_in_place(&mut rhs);
        let mu = rhs[n_g..].to_vec();
        rhs.truncate(n_g);
        (rhs, mu)
    }

    /// Interior recovery `u_I = A_II^-1 (f_I - A_IG w)`.
    pub fn recover_interior(&self, w: &[f64]) -> Vec<f64> {
        let n_i = self.system.n_interior();
        if n_i == 0 {
            return Vec::new();
        }
        let mut rhs = self.system.f_i.clone();
        let mut t = vec![0.0; n_i];
        self.system.a_ig.matvec(w, &mut t);
        for i in 0..n_i {
            rhs[i] -= t[i];
        }
        self.a_ii.as_ref().unwrap().solve(&rhs)
    }
}

/// The assembled dual system for one (domain, space, algorithm) choice.
pub struct IetiSolver {
    pub skeleton: SkeletonIndex,
    pub jump: JumpMatrix,
    pub constraints: PrimalConstraints,
    pub patches: Vec<PatchOperators>,
    pub scaling: Scaling,
    pub coarse_matrix: SparseMatrix,
    coarse: SpdCholesky,
}

impl IetiSolver {
    pub fn assemble(
        skeleton: SkeletonIndex,
        jump: JumpMatrix,
        constraints: PrimalConstraints,
        patches: Vec<PatchOperators>,
        scaling: Scaling,
    ) -> Result<Self, IetiError> {
        // S_Pi = sum_k Psi^(k)' S^(k) Psi^(k), scattered by global primal ids
        let n_pi = constraints.n_global;
        let mut tri = TripletBuffer::new(n_pi, n_pi);
        for patch in &patches {
            let nc = patch.n_primal;
            if nc == 0 {
                continue;
            }
            let n_g = patch.n_skeleton();
            // s_local = Psi' (S Psi)
            let mut s_psi = DenseMatrix::zeros(n_g, nc);
            let mut col = vec![0.0; n_g];
            let mut out = vec![0.0; n_g];
            for j in 0..nc {
                for r in 0..n_g {
                    col[r] = patch.psi.get(r, j);
                }
                patch.schur.matvec(&col, &mut out);
                for r in 0..n_g {
                    s_psi.set(r, j, out[r]);
                }
            }
            let mut s_local = DenseMatrix::zeros(nc, nc);
            for i in 0..nc {
                for j in 0..nc {
                    let mut acc = 0.0;
                    for r in 0..n_g {
                        acc += patch.psi.get(r, i) * s_psi.get(r, j);
                    }
                    s_local.set(i, j, acc);
                }
            }
            s_local.symmetrize();
            for i in 0..nc {
                for j in 0..nc {
                    tri.push(
                        patch.primal_globals[i],
                        patch.primal_globals[j],
                        s_local.get(i, j),
                    );
                }
            }
        }
        let coarse_matrix = tri.compress();
        let coarse = if n_pi > 0 {
            factor_spd(&coarse_matrix).map_err(IetiError::SingularCoarse)?
        } else {
            // no primal DOFs (every patch touches the Dirichlet boundary and
            // the algorithm produced no rows); keep a 1x1 dummy, never used
            factor_spd(&SparseMatrix::from_triplets(1, 1, [(0, 0, 1.0)])).unwrap()
        };
        Ok(Self {
            skeleton,
            jump,
            constraints,
            patches,
            scaling,
            coarse_matrix,
            coarse,
        })
    }

    pub fn n_multipliers(&self) -> usize {
        self.jump.num_rows()
    }

    pub fn n_skeleton_total(&self) -> usize {
        self.skeleton.total()
    }

    pub fn n_primal(&self) -> usize {
        self.constraints.n_global
    }

    /// Concatenated reduced loads `g`.
    pub fn g_concat(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.n_skeleton_total()];
        for (k, patch) in self.patches.iter().enumerate() {
            let range = self.skeleton.patch_range(k);
            g[range].copy_from_slice(&patch.g);
        }
        g
    }

    /// The common solve pipeline: given a concatenated skeleton right side
    /// `q`, solves the per-patch saddle systems with `(q^(k), 0)`, the
    /// coarse system `S_Pi w_Pi = Psi' q`, and returns
    /// `w = w_Delta + Psi w_Pi`.
    pub fn pipeline(&self, q: &[f64]) -> Vec<f64> {
        debug_assert_eq!(q.len(), self.n_skeleton_total());
        let mut w = vec![0.0; self.n_skeleton_total()];
        let n_pi = self.constraints.n_global;
        let mut coarse_rhs = vec![0.0; n_pi.max(1)];
        for (k, patch) in self.patches.iter().enumerate() {
            let range = self.skeleton.patch_range(k);
            let qk = &q[range.clone()];
            patch.saddle_solve(qk, &mut w[range]);
            // Psi' q contribution
            for (j, &global) in patch.primal_globals.iter().enumerate() {
                let mut acc = 0.0;
                for r in 0..patch.n_skeleton() {
                    acc += patch.psi.get(r, j) * qk[r];
                }
                coarse_rhs[global] += acc;
            }
        }
        if n_pi > 0 {
            let w_pi = self.coarse.solve(&coarse_rhs);
            for (k, patch) in self.patches.iter().enumerate() {
                let range = self.skeleton.patch_range(k);
                let wk = &mut w[range];
                for (j, &global) in patch.primal_globals.iter().enumerate() {
                    let c = w_pi[global];
                    if c != 0.0 {
                        for r in 0..patch.n_skeleton() {
                            wk[r] += patch.psi.get(r, j) * c;
                        }
                    }
                }
            }
        }
        w
    }

    /// `out = F lambda = B F_0 B' lambda`
    pub fn apply_f(&self, lambda: &[f64], out: &mut [f64]) {
        let mut q = vec![0.0; self.n_skeleton_total()];
        self.jump.apply_transpose_add(lambda, &mut q);
        let w = self.pipeline(&q);
        self.jump.apply(&w, out);
    }

    /// `d = F_0 g`
    pub fn assemble_d(&self) -> Vec<f64> {
        let w = self.pipeline(&self.g_concat());
        let mut d = vec![0.0; self.n_multipliers()];
        self.jump.apply(&w, &mut d);
        d
    }

    /// `out = M_sD r = B D^-1 S D^-1 B' r`
    pub fn apply_msd(&self, r: &[f64], out: &mut [f64]) {
        let mut t = vec![0.0; self.n_skeleton_total()];
        self.jump.apply_transpose_add(r, &mut t);
        for i in 0..t.len() {
            t[i] /= self.scaling.d[i];
        }
        let mut s = vec![0.0; self.n_skeleton_total()];
        for (k, patch) in self.patches.iter().enumerate() {
            let range = self.skeleton.patch_range(k);
            patch.schur.matvec(&t[range.clone()], &mut s[range]);
        }
        for i in 0..s.len() {
            s[i] /= self.scaling.d[i];
        }
        self.jump.apply(&s, out);
    }

    /// Recovers the skeleton solution `w = F_0-pipeline(g - B' lambda)` and
    /// the interior values per patch; returns kept-ordered coefficient
    /// vectors (interior block then skeleton block).
    pub fn recover(&self, lambda: &[f64]) -> Vec<Vec<f64>> {
        let mut q = self.g_concat();
        let mut minus_bt = vec![0.0; self.n_skeleton_total()];
        self.jump.apply_transpose_add(lambda, &mut minus_bt);
        for i in 0..q.len() {
            q[i] -= minus_bt[i];
        }
        let w = self.pipeline(&q);
        let mut solution = Vec::with_capacity(self.patches.len());
        for (k, patch) in self.patches.iter().enumerate() {
            let range = self.skeleton.patch_range(k);
            let wk = &w[range];
            let mut coeffs = patch.recover_interior(wk);
            coeffs.extend_from_slice(wk);
            solution.push(coeffs);
        }
        solution
    }
}
