//! Patch-local Galerkin assembly of the Poisson bilinear form and load:
//! DOF classification into interior/skeleton blocks, Gauss-Legendre
//! quadrature per knot span, and the blocked stiffness matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{Corner, GeometryError, NurbsPatchMap, SideId};
use crate::linalg::{SparseMatrix, TripletBuffer};
use crate::math;
use crate::splines::{KnotVector, SplineError, TensorSplineSpace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("patch {patch}: jacobian determinant {det} is not positive at quadrature node ({u}, {v})")]
    DegenerateGeometry {
        patch: usize,
        u: f64,
        v: f64,
        det: f64,
    },
    #[error("quadrature needs at least one point")]
    EmptyRule,
}

/// Analysis-space bookkeeping for one patch: which tensor-product basis
/// functions survive the homogeneous Dirichlet constraint and how the kept
/// ones split into the interior block (first) and the skeleton block.
///
/// A basis function is dropped iff its trace on some Dirichlet side is
/// nonzero; a kept one is interior iff its trace vanishes on all four
/// sides. Both blocks are ordered lexicographically (`u` fastest).
#[derive(Debug, Clone)]
pub struct PatchDiscretization {
    space: TensorSplineSpace,
    dirichlet: Vec<SideId>,
    kept: Vec<usize>,
    kept_index: Vec<Option<usize>>,
    n_interior: usize,
}

/// One 1D trace degree of freedom along a side, in traversal order.
#[derive(Debug, Clone, Copy)]
pub struct SideDof {
    /// index along the side (0-based, in traversal order)
    pub position: usize,
    /// global tensor index in the full space
    pub tensor: usize,
    /// kept index (interior-first ordering), if the DOF survived
    pub kept: Option<usize>,
    /// set when the DOF sits at one of the side's endpoints
    pub corner: Option<Corner>,
}

impl PatchDiscretization {
    pub fn new(space: TensorSplineSpace, dirichlet: Vec<SideId>) -> Self {
        Self::with_extra_dropped(space, dirichlet, &[])
    }

    /// Like [`Self::new`] with additional tensor indices eliminated. Used to
    /// reconcile kept/dropped status across interfaces when a neighboring
    /// patch's Dirichlet side removes the matched partner of a DOF (the
    /// conforming space then forces the coefficient to zero).
    pub fn with_extra_dropped(
        space: TensorSplineSpace,
        mut dirichlet: Vec<SideId>,
        extra_dropped: &[usize],
    ) -> Self {
        dirichlet.sort_by_key(|s| s.as_str());
        dirichlet.dedup();
        let n_u = space.n_u();
        let n_v = space.n_v();
        let mut dropped = vec![false; space.dim()];
        for &g in extra_dropped {
            dropped[g] = true;
        }
        let on_dirichlet = |i: usize, j: usize| -> bool {
            dirichlet.iter().any(|s| match s {
                SideId::UMin => i == 0,
                SideId::UMax => i == n_u - 1,
                SideId::VMin => j == 0,
                SideId::VMax => j == n_v - 1,
            })
        };
        let on_boundary =
            |i: usize, j: usize| -> bool { i == 0 || i == n_u - 1 || j == 0 || j == n_v - 1 };

        let mut interior = Vec::new();
        let mut skeleton = Vec::new();
        for j in 0..n_v {
            for i in 0..n_u {
                let g = space.index(i, j);
                if on_dirichlet(i, j) || dropped[g] {
                    continue;
                }
                if on_boundary(i, j) {
                    skeleton.push(g);
                } else {
                    interior.push(g);
                }
            }
        }
        let n_interior = interior.len();
        let mut kept = interior;
        kept.extend_from_slice(&skeleton);
        let mut kept_index = vec![None; space.dim()];
        for (pos, &g) in kept.iter().enumerate() {
            kept_index[g] = Some(pos);
        }
        Self {
            space,
            dirichlet,
            kept,
            kept_index,
            n_interior,
        }
    }

    pub fn space(&self) -> &TensorSplineSpace {
        &self.space
    }

    pub fn dirichlet_sides(&self) -> &[SideId] {
        &self.dirichlet
    }

    pub fn n_total(&self) -> usize {
        self.kept.len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_skeleton(&self) -> usize {
        self.kept.len() - self.n_interior
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn kept_of_tensor(&self, tensor: usize) -> Option<usize> {
        self.kept_index[tensor]
    }

    /// Local skeleton index of a kept DOF, if it lies in the skeleton block.
    pub fn skeleton_of_kept(&self, kept: usize) -> Option<usize> {
        (kept >= self.n_interior).then(|| kept - self.n_interior)
    }

    /// Trace DOFs along `side` in traversal order (the full 1D range, also
    /// listing the Dirichlet-dropped ones with `kept == None`).
    pub fn side_dofs(&self, side: SideId) -> Vec<SideDof> {
        let n_u = self.space.n_u();
        let n_v = self.space.n_v();
        let len = match side {
            SideId::UMin | SideId::UMax => n_v,
            SideId::VMin | SideId::VMax => n_u,
        };
        let (c_start, c_end) = side.corners();
        (0..len)
            .map(|pos| {
                let (i, j) = match side {
                    SideId::UMin => (0, pos),
                    SideId::UMax => (n_u - 1, pos),
                    SideId::VMin => (pos, 0),
                    SideId::VMax => (pos, n_v - 1),
                };
                let tensor = self.space.index(i, j);
                let corner = if pos == 0 {
                    Some(c_start)
                } else if pos == len - 1 {
                    Some(c_end)
                } else {
                    None
                };
                SideDof {
                    position: pos,
                    tensor,
                    kept: self.kept_index[tensor],
                    corner,
                }
            })
            .collect()
    }

    /// Kept index of the corner basis function, if it survived.
    pub fn corner_dof(&self, corner: Corner) -> Option<usize> {
        let n_u = self.space.n_u();
        let n_v = self.space.n_v();
        let (i, j) = match corner {
            Corner::C00 => (0, 0),
            Corner::C10 => (n_u - 1, 0),
            Corner::C01 => (0, n_v - 1),
            Corner::C11 => (n_u - 1, n_v - 1),
        };
        self.kept_index[self.space.index(i, j)]
    }

    /// Evaluates a solution given by kept-DOF coefficients (dropped DOFs are
    /// zero by the homogeneous Dirichlet data).
    pub fn eval_solution(&self, coeffs: &[f64], u: f64, v: f64) -> Result<f64, SplineError> {
        debug_assert_eq!(coeffs.len(), self.n_total());
        let (fu, bu) = self.space.kv_u().eval_basis(u)?;
        let (fv, bv) = self.space.kv_v().eval_basis(v)?;
        let mut acc = 0.0;
        for (dj, bj) in bv.iter().enumerate() {
            for (di, bi) in bu.iter().enumerate() {
                let g = self.space.index(fu + di, fv + dj);
                if let Some(k) = self.kept_index[g] {
                    acc += bi * bj * coeffs[k];
                }
            }
        }
        Ok(acc)
    }
}

/// Gauss-Legendre points per knot span, mapped affinely into each span.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    points_per_span: usize,
    /// span boundaries, length `num_spans + 1`
    breaks: Vec<f64>,
    /// flattened nodes and weights, `num_spans * points_per_span` each
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn num_spans(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn points_per_span(&self) -> usize {
        self.points_per_span
    }

    pub fn span_points(&self, span: usize) -> (&[f64], &[f64]) {
        let lo = span * self.points_per_span;
        let hi = lo + self.points_per_span;
        (&self.nodes[lo..hi], &self.weights[lo..hi])
    }
}

/// `q`-point Gauss-Legendre rule on every span of `kv`.
pub fn gauss_rule(q: usize, kv: &KnotVector) -> Result<QuadratureRule, AssemblyError> {
    if q == 0 {
        return Err(AssemblyError::EmptyRule);
    }
    let (ref_nodes, ref_weights) = gauss_legendre_reference(q);
    let breaks = kv.breakpoints().to_vec();
    let mut nodes = Vec::with_capacity((breaks.len() - 1) * q);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for s in 0..breaks.len() - 1 {
        let (a, b) = (breaks[s], breaks[s + 1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for i in 0..q {
            nodes.push(mid + half * ref_nodes[i]);
            weights.push(half * ref_weights[i]);
        }
    }
    Ok(QuadratureRule {
        points_per_span: q,
        breaks,
        nodes,
        weights,
    })
}

/// Nodes and weights of the `q`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre_reference(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let pi = core::f64::consts::PI;
    for i in 0..(q + 1) / 2 {
        let mut x = math::cos(pi * (i as f64 + 0.75) / (q as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_q and P_q'
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=q {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if q == 1 { p1 } else { p1 };
            dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if math::abs(dx) < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    (nodes, weights)
}

/// The 2x2-blocked patch stiffness matrix and load vector in the
/// interior-first ordering of the discretization.
#[derive(Debug, Clone)]
pub struct PatchSystem {
    pub a_ii: SparseMatrix,
    pub a_ig: SparseMatrix,
    pub a_gi: SparseMatrix,
    pub a_gg: SparseMatrix,
    pub f_i: Vec<f64>,
    pub f_g: Vec<f64>,
}

impl PatchSystem {
    pub fn n_interior(&self) -> usize {
        self.a_ii.nrows()
    }

    pub fn n_skeleton(&self) -> usize {
        self.a_gg.nrows()
    }

    /// Quadratic form `x' A x` of the full kept-DOF stiffness.
    pub fn energy(&self, interior: &[f64], skeleton: &[f64]) -> f64 {
        self.a_ii.bilinear(interior, interior)
            + 2.0 * self.a_ig.bilinear(interior, skeleton)
            + self.a_gg.bilinear(skeleton, skeleton)
    }

    /// `<f, x>` against the kept coefficients.
    pub fn load_product(&self, interior: &[f64], skeleton: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..interior.len() {
            s += self.f_i[i] * interior[i];
        }
        for i in 0..skeleton.len() {
            s += self.f_g[i] * skeleton[i];
        }
        s
    }
}

/// Per-span table of 1D basis values and first derivatives at the
/// quadrature nodes.
struct BasisTable {
    /// first active basis index per span
    first: Vec<usize>,
    /// `[span][node][dof]` values, flattened
    values: Vec<f64>,
    derivs: Vec<f64>,
    q: usize,
    cols: usize,
}

impl BasisTable {
    fn build(kv: &KnotVector, rule: &QuadratureRule) -> Result<Self, AssemblyError> {
        let q = rule.points_per_span();
        let cols = kv.degree() + 1;
        let spans = rule.num_spans();
        let mut first = vec![0usize; spans];
        let mut values = vec![0.0; spans * q * cols];
        let mut derivs = vec![0.0; spans * q * cols];
        for s in 0..spans {
            let (nodes, _) = rule.span_points(s);
            for (ni, &t) in nodes.iter().enumerate() {
                let (f, table) = kv.eval_basis_derivs(t, 1)?;
                first[s] = f;
                let base = (s * q + ni) * cols;
                values[base..base + cols].copy_from_slice(table.row(0));
                derivs[base..base + cols].copy_from_slice(table.row(1));
            }
        }
        Ok(Self {
            first,
            values,
            derivs,
            q,
            cols,
        })
    }

    fn at(&self, span: usize, node: usize) -> (usize, &[f64], &[f64]) {
        let base = (span * self.q + node) * self.cols;
        (
            self.first[span],
            &self.values[base..base + self.cols],
            &self.derivs[base..base + self.cols],
        )
    }
}

/// Assembles the four stiffness blocks
/// `A[i][j] = integral grad(phi_j)' (grad G)^-1 (grad G)^-' grad(phi_i) |det grad G|`
/// over all knot spans. `patch` only labels error messages.
pub fn assemble_stiffness(
    disc: &PatchDiscretization,
    map: &NurbsPatchMap,
    rule_u: &QuadratureRule,
    rule_v: &QuadratureRule,
    patch: usize,
) -> Result<PatchSystem, AssemblyError> {
    let space = disc.space();
    let tab_u = BasisTable::build(space.kv_u(), rule_u)?;
    let tab_v = BasisTable::build(space.kv_v(), rule_v)?;
    let cu = tab_u.cols;
    let cv = tab_v.cols;
    let n_local = cu * cv;

    let n_i = disc.n_interior();
    let n_g = disc.n_skeleton();
    let mut tri_ii = TripletBuffer::new(n_i, n_i);
    let mut tri_ig = TripletBuffer::new(n_i, n_g);
    let mut tri_gi = TripletBuffer::new(n_g, n_i);
    let mut tri_gg = TripletBuffer::new(n_g, n_g);

    let mut element = vec![0.0; n_local * n_local];
    let mut grads = vec![[0.0; 2]; n_local];

    for su in 0..rule_u.num_spans() {
        for sv in 0..rule_v.num_spans() {
            element.iter_mut().for_each(|e| *e = 0.0);
            let (nodes_u, w_u) = rule_u.span_points(su);
            let (nodes_v, w_v) = rule_v.span_points(sv);
            let mut first_u = 0;
            let mut first_v = 0;
            for (nu, &tu) in nodes_u.iter().enumerate() {
                for (nv, &tv) in nodes_v.iter().enumerate() {
                    let (fu, bu, du) = tab_u.at(su, nu);
                    let (fv, bv, dv) = tab_v.at(sv, nv);
                    first_u = fu;
                    first_v = fv;
                    let jac = map.jacobian(tu, tv)?;
                    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                    if !(det > 0.0) {
                        return Err(AssemblyError::DegenerateGeometry {
                            patch,
                            u: tu,
                            v: tv,
                            det,
                        });
                    }
                    // M = J^-1 J^-' * det * quadrature weight
                    let inv = [
                        [jac[1][1] / det, -jac[0][1] / det],
                        [-jac[1][0] / det, jac[0][0] / det],
                    ];
                    let scale = det * w_u[nu] * w_v[nv];
                    let m00 = (inv[0][0] * inv[0][0] + inv[0][1] * inv[0][1]) * scale;
                    let m01 = (inv[0][0] * inv[1][0] + inv[0][1] * inv[1][1]) * scale;
                    let m11 = (inv[1][0] * inv[1][0] + inv[1][1] * inv[1][1]) * scale;

                    for b in 0..cv {
                        for a in 0..cu {
                            let l = b * cu + a;
                            grads[l] = [du[a] * bv[b], bu[a] * dv[b]];
                        }
                    }
                    for la in 0..n_local {
                        let ga = grads[la];
                        let ma = [m00 * ga[0] + m01 * ga[1], m01 * ga[0] + m11 * ga[1]];
                        for lb in la..n_local {
                            let gb = grads[lb];
                            element[la * n_local + lb] += ma[0] * gb[0] + ma[1] * gb[1];
                        }
                    }
                }
            }
            // scatter the symmetric element matrix into the blocks
            for la in 0..n_local {
                let (au, av) = (la % cu, la / cu);
                let ta = space.index(first_u + au, first_v + av);
                let Some(ka) = disc.kept_of_tensor(ta) else {
                    continue;
                };
                for lb in 0..n_local {
                    let value = if la <= lb {
                        element[la * n_local + lb]
                    } else {
                        element[lb * n_local + la]
                    };
                    let (bu_i, bv_i) = (lb % cu, lb / cu);
                    let tb = space.index(first_u + bu_i, first_v + bv_i);
                    let Some(kb) = disc.kept_of_tensor(tb) else {
                        continue;
                    };
                    match (disc.skeleton_of_kept(ka), disc.skeleton_of_kept(kb)) {
                        (None, None) => tri_ii.push(ka, kb, value),
                        (None, Some(sb)) => tri_ig.push(ka, sb, value),
                        (Some(sa), None) => tri_gi.push(sa, kb, value),
                        (Some(sa), Some(sb)) => tri_gg.push(sa, sb, value),
                    }
                }
            }
        }
    }

    Ok(PatchSystem {
        a_ii: tri_ii.compress(),
        a_ig: tri_ig.compress(),
        a_gi: tri_gi.compress(),
        a_gg: tri_gg.compress(),
        f_i: vec![0.0; n_i],
        f_g: vec![0.0; n_g],
    })
}

/// Assembles `integral f(G(.)) phi_i |det grad G|`, split into the
/// interior and skeleton blocks.
pub fn assemble_load(
    disc: &PatchDiscretization,
    map: &NurbsPatchMap,
    rule_u: &QuadratureRule,
    rule_v: &QuadratureRule,
    f: &dyn Fn([f64; 2]) -> f64,
) -> Result<(Vec<f64>, Vec<f64>), AssemblyError> {
    let space = disc.space();
    let tab_u = BasisTable::build(space.kv_u(), rule_u)?;
    let tab_v = BasisTable::build(space.kv_v(), rule_v)?;
    let cu = tab_u.cols;
    let cv = tab_v.cols;

    let mut f_i = vec![0.0; disc.n_interior()];
    let mut f_g = vec![0.0; disc.n_skeleton()];
    for su in 0..rule_u.num_spans() {
        for sv in 0..rule_v.num_spans() {
            let (nodes_u, w_u) = rule_u.span_points(su);
            let (nodes_v, w_v) = rule_v.span_points(sv);
            for (nu, &tu) in nodes_u.iter().enumerate() {
                for (nv, &tv) in nodes_v.iter().enumerate() {
                    let (fu, bu, _) = tab_u.at(su, nu);
                    let (fv, bv, _) = tab_v.at(sv, nv);
                    let det = map.jacobian_det(tu, tv)?;
                    let x = map.eval(tu, tv)?;
                    let scale = f(x) * det * w_u[nu] * w_v[nv];
                    for b in 0..cv {
                        for a in 0..cu {
                            let t = space.index(fu + a, fv + b);
                            if let Some(k) = disc.kept_of_tensor(t) {
                                let contrib = scale * bu[a] * bv[b];
                                match disc.skeleton_of_kept(k) {
                                    None => f_i[k] += contrib,
                                    Some(s) => f_g[s] += contrib,
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((f_i, f_g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MultiPatchDomain;

    fn space(p: usize, elements: usize) -> TensorSplineSpace {
        let kv = KnotVector::open_uniform(p, elements).unwrap();
        TensorSplineSpace::new(kv.clone(), kv)
    }

    fn identity_map() -> NurbsPatchMap {
        NurbsPatchMap::bilinear([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0])
    }

    #[test]
    fn classify_bubble_only() {
        let disc = PatchDiscretization::new(space(2, 1), SideId::ALL.to_vec());
        assert_eq!(disc.space().dim(), 9);
        assert_eq!(disc.n_total(), 1);
        assert_eq!(disc.n_interior(), 1);
        assert_eq!(disc.n_skeleton(), 0);
    }

    #[test]
    fn classify_no_dirichlet() {
        let disc = PatchDiscretization::new(space(1, 2), Vec::new());
        assert_eq!(disc.n_total(), 9);
        assert_eq!(disc.n_interior(), 1);
        assert_eq!(disc.n_skeleton(), 8);
    }

    #[test]
    fn classify_one_side() {
        let disc = PatchDiscretization::new(space(2, 4), vec![SideId::UMin]);
        // 6x6 basis, dropping the i = 0 column
        assert_eq!(disc.n_total(), 30);
        // brute-force enumeration over tensor indices
        let mut interior = 0;
        let mut skeleton = 0;
        for j in 0..6 {
            for i in 0..6 {
                if i == 0 {
                    continue;
                }
                if i == 5 || j == 0 || j == 5 {
                    skeleton += 1;
                } else {
                    interior += 1;
                }
            }
        }
        assert_eq!(disc.n_interior(), interior);
        assert_eq!(disc.n_skeleton(), skeleton);
    }

    #[test]
    fn gauss_rule_examples() {
        let kv = KnotVector::open_uniform(1, 1).unwrap();
        let rule = gauss_rule(1, &kv).unwrap();
        let (nodes, weights) = rule.span_points(0);
        assert!((nodes[0] - 0.5).abs() < 1e-15);
        assert!((weights[0] - 1.0).abs() < 1e-15);

        let rule = gauss_rule(2, &kv).unwrap();
        let (nodes, _) = rule.span_points(0);
        let d = 1.0 / (2.0 * 3.0f64.sqrt());
        assert!((nodes[0] - (0.5 - d)).abs() < 1e-15);
        assert!((nodes[1] - (0.5 + d)).abs() < 1e-15);

        // integral of t^3 over [0, 1] is exact with q = 2
        let mut acc = 0.0;
        let (nodes, weights) = rule.span_points(0);
        for i in 0..2 {
            acc += weights[i] * nodes[i].powi(3);
        }
        assert!((acc - 0.25).abs() < 1e-14);
    }

    #[test]
    fn bilinear_element_matrix() {
        // classic Q1 Laplacian on the unit square
        let disc = PatchDiscretization::new(space(1, 1), Vec::new());
        let rule = gauss_rule(2, disc.space().kv_u()).unwrap();
        let sys = assemble_stiffness(&disc, &identity_map(), &rule, &rule, 0).unwrap();
        let a = sys.a_gg.to_dense();
        let want = [
            [4.0, -1.0, -1.0, -2.0],
            [-1.0, 4.0, -2.0, -1.0],
            [-1.0, -2.0, 4.0, -1.0],
            [-2.0, -1.0, -1.0, 4.0],
        ];
        for r in 0..4 {
            for c in 0..4 {
                assert!(
                    (a.get(r, c) - want[r][c] / 6.0).abs() < 1e-14,
                    "entry ({r},{c}) = {}",
                    a.get(r, c)
                );
            }
        }
    }

    #[test]
    fn neumann_row_sums_vanish() {
        let d = MultiPatchDomain::ring();
        let kv = KnotVector::open_uniform(2, 2).unwrap();
        let disc = PatchDiscretization::new(
            TensorSplineSpace::new(kv.clone(), kv.clone()),
            Vec::new(),
        );
        let rule = gauss_rule(3, &kv).unwrap();
        let sys = assemble_stiffness(&disc, &d.patches[5], &rule, &rule, 5).unwrap();
        let n_i = disc.n_interior();
        let n_g = disc.n_skeleton();
        let ones_i = vec![1.0; n_i];
        let ones_g = vec![1.0; n_g];
        let mut row = vec![0.0; n_i];
        sys.a_ii.matvec(&ones_i, &mut row);
        sys.a_ig.matvec_add(1.0, &ones_g, &mut row);
        for &v in &row {
            assert!(v.abs() < 1e-10, "row sum {v}");
        }
        let mut row_g = vec![0.0; n_g];
        sys.a_gi.matvec(&ones_i, &mut row_g);
        sys.a_gg.matvec_add(1.0, &ones_g, &mut row_g);
        for &v in &row_g {
            assert!(v.abs() < 1e-10, "row sum {v}");
        }
    }

    #[test]
    fn anisotropic_affine_matches_quadrature_oracle() {
        // x = (2u, v): pull-back of the Laplacian with an anisotropic metric
        let map = NurbsPatchMap::bilinear([0.0, 0.0], [2.0, 0.0], [0.0, 1.0], [2.0, 1.0]);
        let disc = PatchDiscretization::new(space(2, 2), Vec::new());
        let rule = gauss_rule(3, disc.space().kv_u()).unwrap();
        let sys = assemble_stiffness(&disc, &map, &rule, &rule, 0).unwrap();

        // dense quadrature oracle with q = p + 3 over the parameter domain
        let oracle_rule = gauss_rule(5, disc.space().kv_u()).unwrap();
        let n = disc.space().dim();
        let mut oracle = vec![0.0; n * n];
        for su in 0..oracle_rule.num_spans() {
            for sv in 0..oracle_rule.num_spans() {
                let (nu, wu) = oracle_rule.span_points(su);
                let (nv, wv) = oracle_rule.span_points(sv);
                for (iu, &tu) in nu.iter().enumerate() {
                    for (iv, &tv) in nv.iter().enumerate() {
                        let (fu, du_t) = disc.space().kv_u().eval_basis_derivs(tu, 1).unwrap();
                        let (fv, dv_t) = disc.space().kv_v().eval_basis_derivs(tv, 1).unwrap();
                        // J = diag(2, 1): integrand (gx_a gx_b / 4 + gy_a gy_b) * 2
                        let w = wu[iu] * wv[iv] * 2.0;
                        for a_v in 0..dv_t.row(0).len() {
                            for a_u in 0..du_t.row(0).len() {
                                let ga = [
                                    du_t.get(1, a_u) * dv_t.get(0, a_v),
                                    du_t.get(0, a_u) * dv_t.get(1, a_v),
                                ];
                                let ta = disc.space().index(fu + a_u, fv + a_v);
                                for b_v in 0..dv_t.row(0).len() {
                                    for b_u in 0..du_t.row(0).len() {
                                        let gb = [
                                            du_t.get(1, b_u) * dv_t.get(0, b_v),
                                            du_t.get(0, b_u) * dv_t.get(1, b_v),
                                        ];
                                        let tb = disc.space().index(fu + b_u, fv + b_v);
                                        oracle[ta * n + tb] +=
                                            w * (0.25 * ga[0] * gb[0] + ga[1] * gb[1]);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        for (ka, &ta) in disc.kept().iter().enumerate() {
            for (kb, &tb) in disc.kept().iter().enumerate() {
                let got = match (disc.skeleton_of_kept(ka), disc.skeleton_of_kept(kb)) {
                    (None, None) => sys.a_ii.get(ka, kb),
                    (None, Some(sb)) => sys.a_ig.get(ka, sb),
                    (Some(sa), None) => sys.a_gi.get(sa, kb),
                    (Some(sa), Some(sb)) => sys.a_gg.get(sa, sb),
                };
                assert!(
                    (got - oracle[ta * n + tb]).abs() < 1e-12,
                    "mismatch at kept ({ka},{kb})"
                );
            }
        }
    }

    #[test]
    fn load_examples() {
        let disc = PatchDiscretization::new(space(1, 1), Vec::new());
        let rule = gauss_rule(2, disc.space().kv_u()).unwrap();
        let (f_i, f_g) =
            assemble_load(&disc, &identity_map(), &rule, &rule, &|_| 0.0).unwrap();
        assert!(f_i.iter().chain(&f_g).all(|&v| v == 0.0));

        let (_, f_g) = assemble_load(&disc, &identity_map(), &rule, &rule, &|_| 1.0).unwrap();
        for &v in &f_g {
            assert!((v - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn stiffness_symmetry() {
        let d = MultiPatchDomain::ring();
        let kv = KnotVector::open_uniform(3, 2).unwrap();
        let disc = PatchDiscretization::new(
            TensorSplineSpace::new(kv.clone(), kv.clone()),
            vec![SideId::UMin],
        );
        let rule = gauss_rule(4, &kv).unwrap();
        let sys = assemble_stiffness(&disc, &d.patches[1], &rule, &rule, 1).unwrap();
        let gg = sys.a_gg.to_dense();
        let mut max_asym: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        for r in 0..gg.nrows() {
            for c in 0..gg.ncols() {
                max_asym = max_asym.max((gg.get(r, c) - gg.get(c, r)).abs());
                max_abs = max_abs.max(gg.get(r, c).abs());
            }
        }
        assert!(max_asym <= 1e-12 * max_abs);
        // off-diagonal blocks are exact transposes by construction
        let ig = sys.a_ig.to_dense();
        let gi = sys.a_gi.to_dense();
        for r in 0..ig.nrows() {
            for c in 0..ig.ncols() {
                assert_eq!(ig.get(r, c), gi.get(c, r));
            }
        }
    }

    #[test]
    fn ring_inner_circumference_by_quadrature() {
        let d = MultiPatchDomain::ring();
        let kv = KnotVector::open_uniform(2, 1).unwrap();
        let rule = gauss_rule(16, &kv).unwrap();
        let mut length = 0.0;
        for sector in 0..4 {
            let map = &d.patches[sector];
            for s in 0..rule.num_spans() {
                let (nodes, weights) = rule.span_points(s);
                for (i, &t) in nodes.iter().enumerate() {
                    let vel = map.side_velocity(SideId::UMin, t).unwrap();
                    length += weights[i] * crate::math::hypot(vel[0], vel[1]);
                }
            }
        }
        assert!(
            (length - 2.0 * core::f64::consts::PI).abs() < 1e-10,
            "length {length}"
        );
    }
}
