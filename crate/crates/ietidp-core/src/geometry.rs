//! NURBS geometry maps and multi-patch topology: interfaces with an
//! orientation flag, Dirichlet side marks, vertex sets, and the built-in
//! benchmark domains (unit-square grids, the 12-patch circular ring and an
//! 84-patch footprint layout).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::splines::{dist2, KnotVector, SplineError, TensorSplineSpace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error("control point / weight count {got} does not match space dimension {expected}")]
    ControlPointCount { expected: usize, got: usize },
    #[error("weight {index} is not positive")]
    NonPositiveWeight { index: usize },
    #[error("parameter ({0}, {1}) outside the unit square")]
    OutOfDomain(f64, f64),
    #[error("patch {patch} side {side:?} appears in {count} interface/boundary records, expected exactly 1")]
    SideCoverage {
        patch: usize,
        side: SideId,
        count: usize,
    },
    #[error("interface {0} references patch {1} which does not exist")]
    DanglingPatch(usize, usize),
    #[error("interface {0} connects a patch side to itself")]
    SelfInterface(usize),
}

/// The four sides of the parameter domain, each with the fixed traversal
/// parameterization used for interface matching:
/// `UMin: t -> (0, t)`, `UMax: t -> (1, t)`, `VMin: t -> (t, 0)`,
/// `VMax: t -> (t, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SideId {
    UMin,
    UMax,
    VMin,
    VMax,
}

impl SideId {
    pub const ALL: [SideId; 4] = [SideId::UMin, SideId::UMax, SideId::VMin, SideId::VMax];

    pub fn point(self, t: f64) -> (f64, f64) {
        match self {
            SideId::UMin => (0.0, t),
            SideId::UMax => (1.0, t),
            SideId::VMin => (t, 0.0),
            SideId::VMax => (t, 1.0),
        }
    }

    /// Corners at `t = 0` and `t = 1` of the traversal.
    pub fn corners(self) -> (Corner, Corner) {
        match self {
            SideId::UMin => (Corner::C00, Corner::C01),
            SideId::UMax => (Corner::C10, Corner::C11),
            SideId::VMin => (Corner::C00, Corner::C10),
            SideId::VMax => (Corner::C01, Corner::C11),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SideId::UMin => "umin",
            SideId::UMax => "umax",
            SideId::VMin => "vmin",
            SideId::VMax => "vmax",
        }
    }

    pub fn parse(s: &str) -> Option<SideId> {
        match s {
            "umin" => Some(SideId::UMin),
            "umax" => Some(SideId::UMax),
            "vmin" => Some(SideId::VMin),
            "vmax" => Some(SideId::VMax),
            _ => None,
        }
    }
}

/// Patch corners, indexed by the parameter-domain coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Corner {
    C00,
    C10,
    C01,
    C11,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::C00, Corner::C10, Corner::C01, Corner::C11];

    pub fn uv(self) -> (f64, f64) {
        match self {
            Corner::C00 => (0.0, 0.0),
            Corner::C10 => (1.0, 0.0),
            Corner::C01 => (0.0, 1.0),
            Corner::C11 => (1.0, 1.0),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Corner::C00 => 0,
            Corner::C10 => 1,
            Corner::C01 => 2,
            Corner::C11 => 3,
        }
    }

    pub fn from_index(i: usize) -> Corner {
        Corner::ALL[i]
    }
}

/// Tensor-product NURBS geometry map from the unit square into the plane.
/// All weights equal to one gives a polynomial B-spline map.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsPatchMap {
    space: TensorSplineSpace,
    control_points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl NurbsPatchMap {
    pub fn new(
        space: TensorSplineSpace,
        control_points: Vec<[f64; 2]>,
        weights: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        if control_points.len() != space.dim() {
            return Err(GeometryError::ControlPointCount {
                expected: space.dim(),
                got: control_points.len(),
            });
        }
        if weights.len() != space.dim() {
            return Err(GeometryError::ControlPointCount {
                expected: space.dim(),
                got: weights.len(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0) {
                return Err(GeometryError::NonPositiveWeight { index: i });
            }
        }
        Ok(Self {
            space,
            control_points,
            weights,
        })
    }

    /// Bilinear (degree 1) map through four corner points.
    pub fn bilinear(p00: [f64; 2], p10: [f64; 2], p01: [f64; 2], p11: [f64; 2]) -> Self {
        let kv = KnotVector::open_uniform(1, 1).unwrap();
        let space = TensorSplineSpace::new(kv.clone(), kv);
        Self::new(space, vec![p00, p10, p01, p11], vec![1.0; 4]).unwrap()
    }

    pub fn space(&self) -> &TensorSplineSpace {
        &self.space
    }

    pub fn control_points(&self) -> &[[f64; 2]] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Rational tensor-product evaluation.
    pub fn eval(&self, u: f64, v: f64) -> Result<[f64; 2], GeometryError> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(GeometryError::OutOfDomain(u, v));
        }
        let (fu, bu) = self.space.kv_u().eval_basis(u)?;
        let (fv, bv) = self.space.kv_v().eval_basis(v)?;
        let mut num = [0.0; 2];
        let mut den = 0.0;
        for (dj, bj) in bv.iter().enumerate() {
            for (di, bi) in bu.iter().enumerate() {
                let g = self.space.index(fu + di, fv + dj);
                let wb = self.weights[g] * bi * bj;
                num[0] += wb * self.control_points[g][0];
                num[1] += wb * self.control_points[g][1];
                den += wb;
            }
        }
        Ok([num[0] / den, num[1] / den])
    }

    /// Jacobian `[[dx/du, dx/dv], [dy/du, dy/dv]]` via the quotient rule.
    pub fn jacobian(&self, u: f64, v: f64) -> Result<[[f64; 2]; 2], GeometryError> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(GeometryError::OutOfDomain(u, v));
        }
        let (fu, du) = self.space.kv_u().eval_basis_derivs(u, 1)?;
        let (fv, dv) = self.space.kv_v().eval_basis_derivs(v, 1)?;
        let mut num = [0.0; 2];
        let mut num_u = [0.0; 2];
        let mut num_v = [0.0; 2];
        let mut den = 0.0;
        let mut den_u = 0.0;
        let mut den_v = 0.0;
        for dj in 0..dv.row(0).len() {
            for di in 0..du.row(0).len() {
                let g = self.space.index(fu + di, fv + dj);
                let w = self.weights[g];
                let b = du.get(0, di) * dv.get(0, dj);
                let b_u = du.get(1, di) * dv.get(0, dj);
                let b_v = du.get(0, di) * dv.get(1, dj);
                let c = self.control_points[g];
                num[0] += w * b * c[0];
                num[1] += w * b * c[1];
                num_u[0] += w * b_u * c[0];
                num_u[1] += w * b_u * c[1];
                num_v[0] += w * b_v * c[0];
                num_v[1] += w * b_v * c[1];
                den += w * b;
                den_u += w * b_u;
                den_v += w * b_v;
            }
        }
        let inv = 1.0 / den;
        let mut j = [[0.0; 2]; 2];
        for d in 0..2 {
            j[d][0] = (num_u[d] - num[d] * inv * den_u) * inv;
            j[d][1] = (num_v[d] - num[d] * inv * den_v) * inv;
        }
        Ok(j)
    }

    pub fn jacobian_det(&self, u: f64, v: f64) -> Result<f64, GeometryError> {
        let j = self.jacobian(u, v)?;
        Ok(j[0][0] * j[1][1] - j[0][1] * j[1][0])
    }

    pub fn side_point(&self, side: SideId, t: f64) -> Result<[f64; 2], GeometryError> {
        let (u, v) = side.point(t);
        self.eval(u, v)
    }

    /// Velocity `d/dt G(gamma(t))` along a side traversal.
    pub fn side_velocity(&self, side: SideId, t: f64) -> Result<[f64; 2], GeometryError> {
        let (u, v) = side.point(t);
        let j = self.jacobian(u, v)?;
        let col = match side {
            SideId::UMin | SideId::UMax => 1,
            SideId::VMin | SideId::VMax => 0,
        };
        Ok([j[0][col], j[1][col]])
    }

    pub fn corner_point(&self, corner: Corner) -> Result<[f64; 2], GeometryError> {
        let (u, v) = corner.uv();
        self.eval(u, v)
    }
}

/// An interface between side `side_a` of `patch_a` and side `side_b` of
/// `patch_b`. With `reversed == false` the traversals are identified as
/// `t <-> t`, otherwise as `t <-> 1 - t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interface {
    pub patch_a: usize,
    pub side_a: SideId,
    pub patch_b: usize,
    pub side_b: SideId,
    pub reversed: bool,
}

/// Multi-patch domain: geometry maps, interface topology, Dirichlet side
/// marks, and the derived vertex sets (each set lists the patch corners
/// meeting at one geometric vertex).
#[derive(Debug, Clone)]
pub struct MultiPatchDomain {
    pub patches: Vec<NurbsPatchMap>,
    pub interfaces: Vec<Interface>,
    pub dirichlet: Vec<(usize, SideId)>,
    pub vertices: Vec<Vec<(usize, Corner)>>,
}

impl MultiPatchDomain {
    /// Validates side coverage and interface sanity, then derives the
    /// vertex sets from interface adjacency plus geometric coincidence.
    pub fn assemble(
        patches: Vec<NurbsPatchMap>,
        interfaces: Vec<Interface>,
        dirichlet: Vec<(usize, SideId)>,
    ) -> Result<Self, GeometryError> {
        for (i, itf) in interfaces.iter().enumerate() {
            if itf.patch_a >= patches.len() {
                return Err(GeometryError::DanglingPatch(i, itf.patch_a));
            }
            if itf.patch_b >= patches.len() {
                return Err(GeometryError::DanglingPatch(i, itf.patch_b));
            }
            if itf.patch_a == itf.patch_b && itf.side_a == itf.side_b {
                return Err(GeometryError::SelfInterface(i));
            }
        }
        for &(k, _) in &dirichlet {
            if k >= patches.len() {
                return Err(GeometryError::DanglingPatch(usize::MAX, k));
            }
        }
        // every patch side in exactly one interface or boundary record
        let mut count = vec![[0usize; 4]; patches.len()];
        for itf in &interfaces {
            count[itf.patch_a][side_slot(itf.side_a)] += 1;
            count[itf.patch_b][side_slot(itf.side_b)] += 1;
        }
        for &(k, s) in &dirichlet {
            count[k][side_slot(s)] += 1;
        }
        for (k, sides) in count.iter().enumerate() {
            for (slot, &c) in sides.iter().enumerate() {
                if c != 1 {
                    return Err(GeometryError::SideCoverage {
                        patch: k,
                        side: SideId::ALL[slot],
                        count: c,
                    });
                }
            }
        }

        let vertices = derive_vertices(&patches, &interfaces)?;
        Ok(Self {
            patches,
            interfaces,
            dirichlet,
            vertices,
        })
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn dirichlet_sides_of(&self, patch: usize) -> Vec<SideId> {
        self.dirichlet
            .iter()
            .filter(|&&(k, _)| k == patch)
            .map(|&(_, s)| s)
            .collect()
    }

    /// `m x n` grid of unit-square patches tiling `(0,m) x (0,n)` with a
    /// full Dirichlet outer boundary.
    pub fn unit_square_grid(m: usize, n: usize) -> Self {
        assert!(m >= 1 && n >= 1);
        let cells: Vec<(i64, i64)> = (0..n as i64)
            .flat_map(|j| (0..m as i64).map(move |i| (i, j)))
            .collect();
        Self::from_unit_cells(&cells)
    }

    /// Domain built from axis-aligned unit cells (grid coordinates); shared
    /// cell edges become interfaces, the remaining sides become Dirichlet.
    fn from_unit_cells(cells: &[(i64, i64)]) -> Self {
        let index_of = |x: i64, y: i64| -> Option<usize> {
            cells.iter().position(|&(cx, cy)| cx == x && cy == y)
        };
        let mut patches = Vec::with_capacity(cells.len());
        for &(x, y) in cells {
            let (x0, y0) = (x as f64, y as f64);
            patches.push(NurbsPatchMap::bilinear(
                [x0, y0],
                [x0 + 1.0, y0],
                [x0, y0 + 1.0],
                [x0 + 1.0, y0 + 1.0],
            ));
        }
        let mut interfaces = Vec::new();
        let mut dirichlet = Vec::new();
        for (k, &(x, y)) in cells.iter().enumerate() {
            // right and top neighbors produce interfaces once
            match index_of(x + 1, y) {
                Some(l) => interfaces.push(Interface {
                    patch_a: k,
                    side_a: SideId::UMax,
                    patch_b: l,
                    side_b: SideId::UMin,
                    reversed: false,
                }),
                None => dirichlet.push((k, SideId::UMax)),
            }
            match index_of(x, y + 1) {
                Some(l) => interfaces.push(Interface {
                    patch_a: k,
                    side_a: SideId::VMax,
                    patch_b: l,
                    side_b: SideId::VMin,
                    reversed: false,
                }),
                None => dirichlet.push((k, SideId::VMax)),
            }
            if index_of(x - 1, y).is_none() {
                dirichlet.push((k, SideId::UMin));
            }
            if index_of(x, y - 1).is_none() {
                dirichlet.push((k, SideId::VMin));
            }
        }
        Self::assemble(patches, interfaces, dirichlet).expect("grid construction is consistent")
    }

    /// Circular ring split into 3 concentric layers x 4 angular sectors.
    ///
    /// Each patch is an exact quarter-annulus NURBS of degree 2 (interior
    /// weight `cos(pi/4)`); radii are 1 and 2 with layer boundaries at 4/3
    /// and 5/3. The `u` direction runs radially outward, `v` runs
    /// counterclockwise, so `det(grad G) > 0`. Dirichlet boundary on the
    /// inner and outer circles.
    pub fn ring() -> Self {
        Self::ring_with_radii([1.0, 4.0 / 3.0, 5.0 / 3.0, 2.0])
    }

    /// Ring variant with custom layer radii (strictly increasing).
    pub fn ring_with_radii(radii: [f64; 4]) -> Self {
        let pi = core::f64::consts::PI;
        let w_mid = math::sqrt(0.5);
        let kv = KnotVector::open_uniform(2, 1).unwrap();

        let mut patches = Vec::with_capacity(12);
        for layer in 0..3 {
            for sector in 0..4usize {
                let (r0, r1) = (radii[layer], radii[layer + 1]);
                let th0 = sector as f64 * 0.5 * pi;
                let thm = th0 + 0.25 * pi;
                let th1 = th0 + 0.5 * pi;
                // unit-radius control points of the exact 90-degree arc
                let arc = [
                    [math::cos(th0), math::sin(th0)],
                    [math::cos(thm) / w_mid, math::sin(thm) / w_mid],
                    [math::cos(th1), math::sin(th1)],
                ];
                let radial = [r0, 0.5 * (r0 + r1), r1];
                // lexicographic, u (radial) fastest
                let mut pts = Vec::with_capacity(9);
                let mut wts = Vec::with_capacity(9);
                for j in 0..3 {
                    for i in 0..3 {
                        pts.push([radial[i] * arc[j][0], radial[i] * arc[j][1]]);
                        wts.push(if j == 1 { w_mid } else { 1.0 });
                    }
                }
                let space = TensorSplineSpace::new(kv.clone(), kv.clone());
                patches.push(NurbsPatchMap::new(space, pts, wts).unwrap());
            }
        }

        let id = |layer: usize, sector: usize| layer * 4 + (sector % 4);
        let mut interfaces = Vec::new();
        for layer in 0..3 {
            for sector in 0..4 {
                // angular neighbor: VMax of this sector meets VMin of the next
                interfaces.push(Interface {
                    patch_a: id(layer, sector),
                    side_a: SideId::VMax,
                    patch_b: id(layer, sector + 1),
                    side_b: SideId::VMin,
                    reversed: false,
                });
            }
        }
        for layer in 0..2 {
            for sector in 0..4 {
                // radial neighbor: UMax (outer edge) meets UMin of the next layer
                interfaces.push(Interface {
                    patch_a: id(layer, sector),
                    side_a: SideId::UMax,
                    patch_b: id(layer + 1, sector),
                    side_b: SideId::UMin,
                    reversed: false,
                });
            }
        }
        let mut dirichlet = Vec::new();
        for sector in 0..4 {
            dirichlet.push((id(0, sector), SideId::UMin));
            dirichlet.push((id(2, sector), SideId::UMax));
        }
        Self::assemble(patches, interfaces, dirichlet).expect("ring construction is consistent")
    }

    /// 84-patch footprint-shaped domain: an 8 x 9 block of unit cells (the
    /// sole) with four 1 x 3 toes on top, all patches bilinear, full
    /// Dirichlet boundary. The published footprint decomposition is not
    /// available; this layout reproduces the patch count and the interior
    /// vertex structure.
    pub fn yeti() -> Self {
        let mut cells: Vec<(i64, i64)> = Vec::with_capacity(84);
        for y in 0..9 {
            for x in 0..8 {
                cells.push((x, y));
            }
        }
        for y in 9..12 {
            for &x in &[0i64, 2, 4, 6] {
                cells.push((x, y));
            }
        }
        debug_assert_eq!(cells.len(), 84);
        Self::from_unit_cells(&cells)
    }
}

fn side_slot(s: SideId) -> usize {
    match s {
        SideId::UMin => 0,
        SideId::UMax => 1,
        SideId::VMin => 2,
        SideId::VMax => 3,
    }
}

/// Groups the `4 K` patch-corner instances into geometric vertex sets:
/// corners are identified along interfaces (respecting orientation) and the
/// resulting classes are merged when their physical positions coincide
/// within 1e-9, which also catches patches touching only at a point.
fn derive_vertices(
    patches: &[NurbsPatchMap],
    interfaces: &[Interface],
) -> Result<Vec<Vec<(usize, Corner)>>, GeometryError> {
    let n = 4 * patches.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    fn union(parent: &mut Vec<usize>, a: usize, b: usize) {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    }

    for itf in interfaces {
        let (a0, a1) = itf.side_a.corners();
        let (b0, b1) = itf.side_b.corners();
        let (b0, b1) = if itf.reversed { (b1, b0) } else { (b0, b1) };
        union(
            &mut parent,
            itf.patch_a * 4 + a0.index(),
            itf.patch_b * 4 + b0.index(),
        );
        union(
            &mut parent,
            itf.patch_a * 4 + a1.index(),
            itf.patch_b * 4 + b1.index(),
        );
    }

    // physical positions for the coincidence merge
    let mut pos = vec![[0.0; 2]; n];
    for (k, map) in patches.iter().enumerate() {
        for corner in Corner::ALL {
            pos[k * 4 + corner.index()] = map.corner_point(corner)?;
        }
    }
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        if find(&mut parent, i) == i {
            reps.push(i);
        }
    }
    for a in 0..reps.len() {
        for b in (a + 1)..reps.len() {
            if dist2(pos[reps[a]], pos[reps[b]]) <= 1e-9 {
                union(&mut parent, reps[a], reps[b]);
            }
        }
    }

    let mut classes: Vec<Vec<(usize, Corner)>> = Vec::new();
    let mut class_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if class_of[r] == usize::MAX {
            class_of[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[class_of[r]].push((i / 4, Corner::from_index(i % 4)));
    }
    Ok(classes)
}

/// Result of [`validate_matching`]: per-interface failures, if any.
#[derive(Debug, Clone, Default)]
pub struct MatchReport {
    pub failures: Vec<MatchFailure>,
}

#[derive(Debug, Clone)]
pub struct MatchFailure {
    pub interface: usize,
    pub reason: String,
}

impl MatchReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<&MatchFailure> {
        self.failures.first()
    }
}

/// Checks that the analysis spaces are fully matching: for every interface,
/// the knot vectors of the touching sides agree (up to orientation
/// reversal) and the geometry traces agree at `4 (p + 1)` sample points
/// within 1e-9.
pub fn validate_matching(
    domain: &MultiPatchDomain,
    spaces: &[TensorSplineSpace],
) -> Result<MatchReport, GeometryError> {
    debug_assert_eq!(spaces.len(), domain.patches.len());
    let mut report = MatchReport::default();
    for (i, itf) in domain.interfaces.iter().enumerate() {
        let kv_a = side_knots(&spaces[itf.patch_a], itf.side_a);
        let kv_b = side_knots(&spaces[itf.patch_b], itf.side_b);
        if !knots_match(kv_a, kv_b, itf.reversed) {
            report.failures.push(MatchFailure {
                interface: i,
                reason: String::from("knot vectors of the touching sides differ"),
            });
            continue;
        }
        let p = kv_a.degree();
        let samples = 4 * (p + 1);
        let map_a = &domain.patches[itf.patch_a];
        let map_b = &domain.patches[itf.patch_b];
        let mut worst = 0.0;
        for s in 0..=samples {
            let t = s as f64 / samples as f64;
            let tb = if itf.reversed { 1.0 - t } else { t };
            let pa = map_a.side_point(itf.side_a, t)?;
            let pb = map_b.side_point(itf.side_b, tb)?;
            let d = dist2(pa, pb);
            if d > worst {
                worst = d;
            }
        }
        if worst > 1e-9 {
            report.failures.push(MatchFailure {
                interface: i,
                reason: format!("geometry traces differ by {worst:e}"),
            });
        }
    }
    Ok(report)
}

/// Knot vector along a side: sides of constant `u` vary in `v` and vice
/// versa.
pub fn side_knots(space: &TensorSplineSpace, side: SideId) -> &KnotVector {
    match side {
        SideId::UMin | SideId::UMax => space.kv_v(),
        SideId::VMin | SideId::VMax => space.kv_u(),
    }
}

fn knots_match(a: &KnotVector, b: &KnotVector, reversed: bool) -> bool {
    if a.degree() != b.degree() || a.knots().len() != b.knots().len() {
        return false;
    }
    let n = a.knots().len();
    if reversed {
        (0..n).all(|i| a.knots()[i] == 1.0 - b.knots()[n - 1 - i])
    } else {
        (0..n).all(|i| a.knots()[i] == b.knots()[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_map() -> NurbsPatchMap {
        NurbsPatchMap::bilinear([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0])
    }

    #[test]
    fn identity_eval_and_jacobian() {
        let map = identity_map();
        let p = map.eval(0.3, 0.7).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-15);
        assert!((p[1] - 0.7).abs() < 1e-15);
        let j = map.jacobian(0.42, 0.17).unwrap();
        assert!((j[0][0] - 1.0).abs() < 1e-14 && (j[1][1] - 1.0).abs() < 1e-14);
        assert!(j[0][1].abs() < 1e-14 && j[1][0].abs() < 1e-14);
        assert!(map.eval(1.3, 0.0).is_err());
    }

    #[test]
    fn affine_jacobian() {
        let map = NurbsPatchMap::bilinear([0.0, 0.0], [2.0, 0.0], [0.0, 3.0], [2.0, 3.0]);
        for &(u, v) in &[(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)] {
            let j = map.jacobian(u, v).unwrap();
            assert!((j[0][0] - 2.0).abs() < 1e-14);
            assert!((j[1][1] - 3.0).abs() < 1e-14);
            assert!(j[0][1].abs() < 1e-14 && j[1][0].abs() < 1e-14);
        }
    }

    #[test]
    fn corner_interpolation() {
        let ring = MultiPatchDomain::ring();
        for map in &ring.patches {
            let p = map.eval(1.0, 1.0).unwrap();
            let last = map.control_points().last().unwrap();
            assert!(dist2(p, *last) < 1e-14);
        }
    }

    #[test]
    fn grid_topology_counts() {
        let d = MultiPatchDomain::unit_square_grid(1, 1);
        assert_eq!(d.num_patches(), 1);
        assert_eq!(d.interfaces.len(), 0);
        assert_eq!(d.dirichlet.len(), 4);

        let d = MultiPatchDomain::unit_square_grid(2, 1);
        assert_eq!(d.interfaces.len(), 1);

        let d = MultiPatchDomain::unit_square_grid(2, 2);
        assert_eq!(d.interfaces.len(), 4);
        let interior: Vec<_> = d.vertices.iter().filter(|v| v.len() == 4).collect();
        assert_eq!(interior.len(), 1);
    }

    #[test]
    fn ring_structure() {
        let d = MultiPatchDomain::ring();
        assert_eq!(d.num_patches(), 12);
        assert_eq!(d.interfaces.len(), 20);
        let interior: Vec<_> = d.vertices.iter().filter(|v| v.len() == 4).collect();
        assert_eq!(interior.len(), 8);
        // inner-circle quarter patch stays on the unit circle along u = 0
        let inner = &d.patches[0];
        for s in 0..=50 {
            let t = s as f64 / 50.0;
            let p = inner.side_point(SideId::UMin, t).unwrap();
            let r = math::hypot(p[0], p[1]);
            assert!((r - 1.0).abs() < 1e-12, "radius {r}");
        }
    }

    #[test]
    fn ring_jacobian_positive() {
        let d = MultiPatchDomain::ring();
        for map in &d.patches {
            for i in 0..10 {
                for j in 0..10 {
                    let u = (i as f64 + 0.5) / 10.0;
                    let v = (j as f64 + 0.5) / 10.0;
                    assert!(map.jacobian_det(u, v).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn yeti_structure() {
        let d = MultiPatchDomain::yeti();
        assert_eq!(d.num_patches(), 84);
        let max_corners = d.vertices.iter().map(|v| v.len()).max().unwrap();
        assert!(max_corners <= 4);
        let spaces: Vec<_> = d
            .patches
            .iter()
            .map(|_| {
                TensorSplineSpace::new(
                    KnotVector::open_uniform(2, 2).unwrap(),
                    KnotVector::open_uniform(2, 2).unwrap(),
                )
            })
            .collect();
        assert!(validate_matching(&d, &spaces).unwrap().passed());
    }

    #[test]
    fn matching_detects_refinement_mismatch() {
        let d = MultiPatchDomain::unit_square_grid(2, 1);
        let coarse = KnotVector::open_uniform(2, 2).unwrap();
        let fine = coarse.uniform_refine();
        let spaces = vec![
            TensorSplineSpace::new(coarse.clone(), coarse.clone()),
            TensorSplineSpace::new(fine.clone(), fine),
        ];
        let report = validate_matching(&d, &spaces).unwrap();
        assert!(!report.passed());
        assert_eq!(report.first_failure().unwrap().interface, 0);

        let equal = vec![
            TensorSplineSpace::new(coarse.clone(), coarse.clone()),
            TensorSplineSpace::new(coarse.clone(), coarse),
        ];
        assert!(validate_matching(&d, &equal).unwrap().passed());
    }

    #[test]
    fn ring_matches_for_various_spaces() {
        let d = MultiPatchDomain::ring();
        for p in 1..=3 {
            let mut kv = KnotVector::open_uniform(p, 1).unwrap();
            for _ in 0..2 {
                kv = kv.uniform_refine();
            }
            let spaces: Vec<_> = d
                .patches
                .iter()
                .map(|_| TensorSplineSpace::new(kv.clone(), kv.clone()))
                .collect();
            assert!(validate_matching(&d, &spaces).unwrap().passed());
        }
    }

    #[test]
    fn side_coverage_enforced() {
        let patches = vec![identity_map()];
        let err = MultiPatchDomain::assemble(patches, Vec::new(), vec![(0, SideId::UMin)]);
        assert!(matches!(err, Err(GeometryError::SideCoverage { .. })));
    }
}
