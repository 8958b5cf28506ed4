//! Primal constraint matrices `C^(k)` and the global primal numbering.
//!
//! Algorithm A places one unit row per existing patch corner (the vertex
//! value); Algorithm B places one row per interface side with weights
//! `integral_edge phi_i ds` computed by 1D Gauss quadrature in physical arc
//! length; Algorithm C takes both row sets. Every vertex and every
//! interface receiving rows defines one global primal DOF shared by the
//! participating patches.

use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::{gauss_rule, PatchDiscretization};
use crate::geometry::{side_knots, MultiPatchDomain, SideId};
use crate::math;

use super::{Algorithm, IetiError, SkeletonIndex};

/// One row of a patch's constraint matrix: weights over local skeleton
/// indices, tied to a global primal DOF.
#[derive(Debug, Clone)]
pub struct CRow {
    pub global: usize,
    pub cols: Vec<usize>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PrimalConstraints {
    pub algorithm: Algorithm,
    pub per_patch: Vec<Vec<CRow>>,
    pub n_global: usize,
}

impl PrimalConstraints {
    pub fn n_local(&self, patch: usize) -> usize {
        self.per_patch[patch].len()
    }
}

/// Builds the constraint rows for all patches.
///
/// Fails when a patch without a Dirichlet side ends up with no primal row,
/// since its saddle system would stay singular.
pub fn build_primal_constraints(
    domain: &MultiPatchDomain,
    discs: &[PatchDiscretization],
    skeleton: &SkeletonIndex,
    algorithm: Algorithm,
) -> Result<PrimalConstraints, IetiError> {
    let mut per_patch: Vec<Vec<CRow>> = vec![Vec::new(); domain.num_patches()];
    let mut n_global = 0usize;

    if algorithm.vertex_primal() {
        for corners in &skeleton.vertex_corners {
            if corners.is_empty() {
                continue;
            }
            let global = n_global;
            n_global += 1;
            for c in corners {
                let local = c.skeleton - skeleton.offsets[c.patch];
                per_patch[c.patch].push(CRow {
                    global,
                    cols: vec![local],
                    weights: vec![1.0],
                });
            }
        }
    }

    if algorithm.edge_primal() {
        for itf in &domain.interfaces {
            let row_a = edge_average_row(domain, discs, skeleton, itf.patch_a, itf.side_a)?;
            let row_b = edge_average_row(domain, discs, skeleton, itf.patch_b, itf.side_b)?;
            let usable = |row: &Option<EdgeRow>| -> bool {
                match row {
                    None => false,
                    Some(r) => {
                        if algorithm == Algorithm::C {
                            // corner values are already primal; the edge row only
                            // adds an independent constraint when the side has
                            // interior trace DOFs
                            r.has_interior
                        } else {
                            true
                        }
                    }
                }
            };
            if usable(&row_a) && usable(&row_b) {
                let global = n_global;
                n_global += 1;
                let ra = row_a.unwrap();
                let rb = row_b.unwrap();
                per_patch[itf.patch_a].push(CRow {
                    global,
                    cols: ra.cols,
                    weights: ra.weights,
                });
                per_patch[itf.patch_b].push(CRow {
                    global,
                    cols: rb.cols,
                    weights: rb.weights,
                });
            }
        }
    }

    for (k, rows) in per_patch.iter().enumerate() {
        if rows.is_empty() && domain.dirichlet_sides_of(k).is_empty() {
            return Err(IetiError::FloatingPatchWithoutPrimal { patch: k });
        }
    }

    Ok(PrimalConstraints {
        algorithm,
        per_patch,
        n_global,
    })
}

struct EdgeRow {
    cols: Vec<usize>,
    weights: Vec<f64>,
    has_interior: bool,
}

/// Weights `integral_edge phi_i ds` over the existing trace DOFs of one
/// side, by `p + 1`-point Gauss quadrature per span with the physical speed
/// `|d(G(gamma(t)))/dt|`. Returns `None` when no trace DOF survives.
fn edge_average_row(
    domain: &MultiPatchDomain,
    discs: &[PatchDiscretization],
    skeleton: &SkeletonIndex,
    patch: usize,
    side: SideId,
) -> Result<Option<EdgeRow>, IetiError> {
    let disc = &discs[patch];
    let kv = side_knots(disc.space(), side);
    let rule = gauss_rule(kv.degree() + 1, kv)?;
    let side_dofs = disc.side_dofs(side);
    let mut acc = vec![0.0; side_dofs.len()];
    let map = &domain.patches[patch];
    for s in 0..rule.num_spans() {
        let (nodes, weights) = rule.span_points(s);
        for (i, &t) in nodes.iter().enumerate() {
            let (first, vals) = kv.eval_basis(t)?;
            let vel = map.side_velocity(side, t)?;
            let speed = math::hypot(vel[0], vel[1]);
            for (d, v) in vals.iter().enumerate() {
                acc[first + d] += weights[i] * v * speed;
            }
        }
    }
    let mut cols = Vec::new();
    let mut row_weights = Vec::new();
    let mut has_interior = false;
    for dof in &side_dofs {
        if let Some(kept) = dof.kept {
            let local = disc
                .skeleton_of_kept(kept)
                .expect("side DOFs lie in the skeleton block");
            debug_assert!(skeleton.offsets[patch] + local < skeleton.offsets[patch + 1]);
            cols.push(local);
            row_weights.push(acc[dof.position]);
            if dof.corner.is_none() {
                has_interior = true;
            }
        }
    }
    if cols.is_empty() {
        return Ok(None);
    }
    Ok(Some(EdgeRow {
        cols,
        weights: row_weights,
        has_interior,
    }))
}
