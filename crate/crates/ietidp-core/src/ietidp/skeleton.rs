//! Matched skeleton indexing: per-patch skeleton DOF numbering inside one
//! concatenated vector, the matched index pairs along every interface
//! (orientation-aware), and the corner skeleton DOFs meeting at each
//! vertex.

use alloc::format;
use alloc::vec::Vec;

use crate::assembly::PatchDiscretization;
use crate::geometry::MultiPatchDomain;
use crate::splines::dist2;

use super::IetiError;

/// A matched pair of skeleton DOFs across an interface, as indices into the
/// concatenated skeleton vector. `a` lives on `patch_a` of the interface,
/// `b` on `patch_b`.
#[derive(Debug, Clone, Copy)]
pub struct MatchedPair {
    pub a: usize,
    pub b: usize,
    /// true when the pair sits at one of the interface's endpoints
    pub corner: bool,
}

#[derive(Debug, Clone)]
pub struct InterfacePairs {
    pub patch_a: usize,
    pub patch_b: usize,
    pub pairs: Vec<MatchedPair>,
}

/// One patch corner participating in a vertex, as a concatenated skeleton
/// index.
#[derive(Debug, Clone, Copy)]
pub struct VertexCorner {
    pub patch: usize,
    pub skeleton: usize,
}

/// Skeleton DOF bookkeeping for the whole domain. Patch `k` owns the
/// half-open range `offsets[k]..offsets[k+1]` of the concatenated skeleton
/// vector, in the local skeleton order of its discretization.
#[derive(Debug, Clone)]
pub struct SkeletonIndex {
    pub offsets: Vec<usize>,
    pub interface_pairs: Vec<InterfacePairs>,
    /// per domain vertex: the existing corner skeleton DOFs, sorted by patch
    pub vertex_corners: Vec<Vec<VertexCorner>>,
}

impl SkeletonIndex {
    pub fn num_patches(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn patch_range(&self, k: usize) -> core::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }
}

/// Builds the matched skeleton index. Requires fully matching interfaces;
/// on top of the knot checks done by geometry validation this re-checks the
/// geometric traces at `p + 2` sample points (tolerance 1e-9) and fails
/// with the offending interface.
pub fn build_skeleton_index(
    domain: &MultiPatchDomain,
    discs: &[PatchDiscretization],
) -> Result<SkeletonIndex, IetiError> {
    debug_assert_eq!(discs.len(), domain.num_patches());
    let mut offsets = Vec::with_capacity(discs.len() + 1);
    offsets.push(0usize);
    for disc in discs {
        offsets.push(offsets.last().unwrap() + disc.n_skeleton());
    }

    let mut interface_pairs = Vec::with_capacity(domain.interfaces.len());
    for (i, itf) in domain.interfaces.iter().enumerate() {
        // defensive trace re-check
        let p = discs[itf.patch_a].space().kv_u().degree();
        let samples = p + 2;
        for s in 0..=samples {
            let t = s as f64 / samples as f64;
            let tb = if itf.reversed { 1.0 - t } else { t };
            let pa = domain.patches[itf.patch_a].side_point(itf.side_a, t)?;
            let pb = domain.patches[itf.patch_b].side_point(itf.side_b, tb)?;
            if dist2(pa, pb) > 1e-9 {
                return Err(IetiError::Matching {
                    interface: i,
                    reason: format!("geometry traces differ at t = {t}"),
                });
            }
        }

        let dofs_a = discs[itf.patch_a].side_dofs(itf.side_a);
        let mut dofs_b = discs[itf.patch_b].side_dofs(itf.side_b);
        if itf.reversed {
            dofs_b.reverse();
        }
        if dofs_a.len() != dofs_b.len() {
            return Err(IetiError::Matching {
                interface: i,
                reason: format!(
                    "trace dimensions differ: {} vs {}",
                    dofs_a.len(),
                    dofs_b.len()
                ),
            });
        }
        let mut pairs = Vec::new();
        for (da, db) in dofs_a.iter().zip(dofs_b.iter()) {
            match (da.kept, db.kept) {
                (Some(ka), Some(kb)) => {
                    let sa = discs[itf.patch_a]
                        .skeleton_of_kept(ka)
                        .expect("side DOFs lie in the skeleton block");
                    let sb = discs[itf.patch_b]
                        .skeleton_of_kept(kb)
                        .expect("side DOFs lie in the skeleton block");
                    pairs.push(MatchedPair {
                        a: offsets[itf.patch_a] + sa,
                        b: offsets[itf.patch_b] + sb,
                        corner: da.corner.is_some(),
                    });
                }
                (None, None) => {}
                _ => {
                    return Err(IetiError::Matching {
                        interface: i,
                        reason: format!(
                            "Dirichlet elimination is asymmetric at side position {}",
                            da.position
                        ),
                    });
                }
            }
        }
        interface_pairs.push(InterfacePairs {
            patch_a: itf.patch_a,
            patch_b: itf.patch_b,
            pairs,
        });
    }

    let mut vertex_corners = Vec::with_capacity(domain.vertices.len());
    for class in &domain.vertices {
        let mut members: Vec<VertexCorner> = Vec::new();
        for &(patch, corner) in class {
            if let Some(kept) = discs[patch].corner_dof(corner) {
                let s = discs[patch]
                    .skeleton_of_kept(kept)
                    .expect("corner DOFs lie in the skeleton block");
                members.push(VertexCorner {
                    patch,
                    skeleton: offsets[patch] + s,
                });
            }
        }
        members.sort_by_key(|m| (m.patch, m.skeleton));
        vertex_corners.push(members);
    }

    Ok(SkeletonIndex {
        offsets,
        interface_pairs,
        vertex_corners,
    })
}
