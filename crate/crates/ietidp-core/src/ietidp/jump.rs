//! The jump matrix `B` and the multiplicity scaling `D`.
//!
//! Every row of `B` has exactly two nonzeros, `+1` and `-1`, pairing two
//! matched skeleton DOFs; the `+1` goes to the lower patch id. Edge rows
//! cover the non-corner matched pairs of every interface for all three
//! algorithms. Corner DOFs never receive edge rows: under Algorithms A and
//! C they are primal, under Algorithm B each vertex instead contributes one
//! row per unordered pair of participating patches (the fully redundant
//! scheme, `m (m - 1) / 2` rows at an `m`-patch vertex).

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::SparseMatrix;

use super::{Algorithm, SkeletonIndex};

#[derive(Debug, Clone)]
pub struct JumpMatrix {
    pub algorithm: Algorithm,
    n_skeleton: usize,
    rows: Vec<(usize, usize)>,
}

impl JumpMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_skeleton(&self) -> usize {
        self.n_skeleton
    }

    /// Rows as (plus column, minus column) pairs.
    pub fn rows(&self) -> &[(usize, usize)] {
        &self.rows
    }

    /// `out = B w`
    pub fn apply(&self, w: &[f64], out: &mut [f64]) {
        debug_assert_eq!(w.len(), self.n_skeleton);
        debug_assert_eq!(out.len(), self.rows.len());
        for (r, &(plus, minus)) in self.rows.iter().enumerate() {
            out[r] = w[plus] - w[minus];
        }
    }

    /// `out += B' lambda`
    pub fn apply_transpose_add(&self, lambda: &[f64], out: &mut [f64]) {
        debug_assert_eq!(lambda.len(), self.rows.len());
        debug_assert_eq!(out.len(), self.n_skeleton);
        for (r, &(plus, minus)) in self.rows.iter().enumerate() {
            out[plus] += lambda[r];
            out[minus] -= lambda[r];
        }
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(
            self.rows.len(),
            self.n_skeleton,
            self.rows
                .iter()
                .enumerate()
                .flat_map(|(r, &(p, m))| [(r, p, 1.0), (r, m, -1.0)]),
        )
    }

    /// Number of multipliers acting on each skeleton DOF.
    pub fn multiplicity(&self) -> Vec<usize> {
        let mut count = vec![0usize; self.n_skeleton];
        for &(p, m) in &self.rows {
            count[p] += 1;
            count[m] += 1;
        }
        count
    }
}

/// Builds `B` for the chosen algorithm. Row order: interfaces in domain
/// order with pairs in traversal order, then (Algorithm B) vertices in
/// domain order with patch pairs lexicographic.
pub fn build_jump_matrix(skeleton: &SkeletonIndex, algorithm: Algorithm) -> JumpMatrix {
    let mut rows = Vec::new();
    for itf in &skeleton.interface_pairs {
        for pair in &itf.pairs {
            if pair.corner {
                continue;
            }
            if itf.patch_a <= itf.patch_b {
                rows.push((pair.a, pair.b));
            } else {
                rows.push((pair.b, pair.a));
            }
        }
    }
    if algorithm == Algorithm::B {
        for corners in &skeleton.vertex_corners {
            for i in 0..corners.len() {
                for j in (i + 1)..corners.len() {
                    rows.push((corners[i].skeleton, corners[j].skeleton));
                }
            }
        }
    }
    JumpMatrix {
        algorithm,
        n_skeleton: skeleton.total(),
        rows,
    }
}

/// Diagonal multiplicity scaling over the concatenated skeleton DOFs:
/// `d_ii = max(1, number of multipliers acting on DOF i)`.
#[derive(Debug, Clone)]
pub struct Scaling {
    pub d: Vec<f64>,
}

pub fn build_scaling(jump: &JumpMatrix) -> Scaling {
    let d = jump
        .multiplicity()
        .into_iter()
        .map(|c| if c == 0 { 1.0 } else { c as f64 })
        .collect();
    Scaling { d }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::PatchDiscretization;
    use crate::geometry::MultiPatchDomain;
    use crate::ietidp::build_skeleton_index;
    use crate::splines::{KnotVector, TensorSplineSpace};

    fn skeleton_for(domain: &MultiPatchDomain, p: usize, elements: usize) -> SkeletonIndex {
        let kv = KnotVector::open_uniform(p, elements).unwrap();
        let discs: Vec<_> = (0..domain.num_patches())
            .map(|k| {
                PatchDiscretization::new(
                    TensorSplineSpace::new(kv.clone(), kv.clone()),
                    domain.dirichlet_sides_of(k),
                )
            })
            .collect();
        build_skeleton_index(domain, &discs).unwrap()
    }

    #[test]
    fn two_patches_row_counts() {
        // 2x1 grid, p = 2, 2 elements per direction: each side trace has 4
        // DOFs of which the 2 corners sit on the Dirichlet boundary; the
        // shared interface keeps 2 interior pairs and no corner pairs.
        let domain = MultiPatchDomain::unit_square_grid(2, 1);
        let skel = skeleton_for(&domain, 2, 2);
        let a = build_jump_matrix(&skel, Algorithm::A);
        assert_eq!(a.num_rows(), 2);
        let b = build_jump_matrix(&skel, Algorithm::B);
        // no existing vertex corners on the fully Dirichlet boundary
        assert_eq!(b.num_rows(), 2);
    }

    #[test]
    fn interior_vertex_redundancy() {
        // 2x2 grid: one interior vertex with 4 corners
        let domain = MultiPatchDomain::unit_square_grid(2, 2);
        let skel = skeleton_for(&domain, 1, 2);
        // each interface keeps 1 non-corner pair (side has 3 DOFs, outer
        // endpoint Dirichlet, inner endpoint is the interior corner)
        let a = build_jump_matrix(&skel, Algorithm::A);
        assert_eq!(a.num_rows(), 4);
        let b = build_jump_matrix(&skel, Algorithm::B);
        // 4 edge rows plus C(4,2) = 6 fully redundant vertex rows
        assert_eq!(b.num_rows(), 4 + 6);
        let c = build_jump_matrix(&skel, Algorithm::C);
        assert_eq!(c.num_rows(), 4);
    }

    #[test]
    fn sign_on_lower_patch() {
        let domain = MultiPatchDomain::unit_square_grid(2, 1);
        let skel = skeleton_for(&domain, 1, 4);
        let jump = build_jump_matrix(&skel, Algorithm::A);
        for &(plus, minus) in jump.rows() {
            assert!(plus < skel.offsets[1]);
            assert!(minus >= skel.offsets[1]);
        }
    }

    #[test]
    fn scaling_counts() {
        let domain = MultiPatchDomain::unit_square_grid(2, 2);
        let skel = skeleton_for(&domain, 1, 2);
        let b = build_jump_matrix(&skel, Algorithm::B);
        let scaling = build_scaling(&b);
        // corner DOFs at the 4-patch vertex carry |P(x)| - 1 = 3 multipliers
        for corners in &skel.vertex_corners {
            if corners.len() == 4 {
                for c in corners {
                    assert_eq!(scaling.d[c.skeleton], 3.0);
                }
            }
        }
        // under A no multiplier touches a corner: clamped to 1
        let a = build_jump_matrix(&skel, Algorithm::A);
        let scaling_a = build_scaling(&a);
        for corners in &skel.vertex_corners {
            for c in corners {
                assert_eq!(scaling_a.d[c.skeleton], 1.0);
            }
        }
        // edge-interior DOFs touched by exactly one multiplier
        for &(p, m) in a.rows() {
            assert_eq!(scaling_a.d[p], 1.0);
            assert_eq!(scaling_a.d[m], 1.0);
        }
    }

    #[test]
    fn rows_vanish_on_continuous_data() {
        let domain = MultiPatchDomain::unit_square_grid(2, 2);
        let skel = skeleton_for(&domain, 2, 2);
        // continuous data: one value per matched equivalence class
        let n = skel.total();
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut Vec<usize>, mut x: usize) -> usize {
            while root[x] != x {
                root[x] = root[root[x]];
                x = root[x];
            }
            x
        }
        let merge = |root: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(root, a), find(root, b));
            if ra != rb {
                root[ra.max(rb)] = ra.min(rb);
            }
        };
        for itf in &skel.interface_pairs {
            for p in &itf.pairs {
                merge(&mut root, p.a, p.b);
            }
        }
        for corners in &skel.vertex_corners {
            if let Some((head, rest)) = corners.split_first() {
                for c in rest {
                    merge(&mut root, head.skeleton, c.skeleton);
                }
            }
        }
        let mut w = vec![0.0; n];
        for i in 0..n {
            let r = find(&mut root, i);
            w[i] = (r as f64 * 0.37).sin();
        }
        for alg in Algorithm::ALL {
            let jump = build_jump_matrix(&skel, alg);
            let mut out = vec![0.0; jump.num_rows()];
            jump.apply(&w, &mut out);
            for &v in &out {
                assert!(v.abs() < 1e-12);
            }
        }
    }
}
