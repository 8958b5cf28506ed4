//! End-to-end solves: discretization setup, the dual PCG solve with
//! solution recovery, and the independently assembled global direct solve
//! used as a correctness oracle.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::assembly::{
    assemble_load, assemble_stiffness, gauss_rule, PatchDiscretization, PatchSystem,
};
use crate::geometry::{validate_matching, MultiPatchDomain};
use crate::linalg::{factor_spd, pcg, PcgOutcome, TripletBuffer};
use crate::math;
use crate::splines::{KnotVector, TensorSplineSpace};

use super::{
    build_jump_matrix, build_primal_constraints, build_scaling, build_skeleton_index, Algorithm,
    IetiError, IetiSolver, PatchOperators,
};

/// Per-patch solution coefficients in kept order (interior block first,
/// then skeleton block).
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub per_patch: Vec<Vec<f64>>,
}

/// Wall-clock seconds per solve phase (zero without `std`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub assembly_s: f64,
    pub factor_s: f64,
    pub pcg_s: f64,
    pub recovery_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub degree: usize,
    pub refinements: usize,
    pub seed: u64,
    /// name of the start-vector generator
    pub rng: &'static str,
    pub iterations: usize,
    pub converged: bool,
    pub kappa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub residual_history: Vec<f64>,
    pub n_multipliers: usize,
    pub n_primal: usize,
    pub n_dofs: usize,
    pub times: PhaseTimes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub rel_tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            seed: 42,
            max_iter: 1000,
        }
    }
}

#[cfg(feature = "std")]
struct Stopwatch(std::time::Instant);
#[cfg(feature = "std")]
impl Stopwatch {
    fn start() -> Self {
        Self(std::time::Instant::now())
    }
    fn lap(&mut self) -> f64 {
        let now = std::time::Instant::now();
        let dt = now.duration_since(self.0).as_secs_f64();
        self.0 = now;
        dt
    }
}
#[cfg(not(feature = "std"))]
struct Stopwatch;
#[cfg(not(feature = "std"))]
impl Stopwatch {
    fn start() -> Self {
        Self
    }
    fn lap(&mut self) -> f64 {
        0.0
    }
}

/// A domain with assembled patch systems for one `(p, r)` choice. The
/// analysis spaces use maximum smoothness: no interior knots at `r = 0`,
/// then `r` uniform refinements (grid size `2^-r`).
pub struct Discretized {
    pub domain: MultiPatchDomain,
    pub degree: usize,
    pub refinements: usize,
    pub discs: Vec<PatchDiscretization>,
    pub systems: Vec<PatchSystem>,
    assembly_s: f64,
}

impl Discretized {
    pub fn new(
        domain: MultiPatchDomain,
        degree: usize,
        refinements: usize,
        rhs: &dyn Fn([f64; 2]) -> f64,
    ) -> Result<Self, IetiError> {
        let mut watch = Stopwatch::start();
        let mut kv = KnotVector::open_uniform(degree, 1).map_err(crate::geometry::GeometryError::from)?;
        for _ in 0..refinements {
            kv = kv.uniform_refine();
        }
        let spaces: Vec<TensorSplineSpace> = (0..domain.num_patches())
            .map(|_| TensorSplineSpace::new(kv.clone(), kv.clone()))
            .collect();

        let report = validate_matching(&domain, &spaces)?;
        if let Some(failure) = report.first_failure() {
            return Err(IetiError::Matching {
                interface: failure.interface,
                reason: failure.reason.clone(),
            });
        }

        let discs = reconcile_discretizations(&domain, spaces);
        let mut systems = Vec::with_capacity(domain.num_patches());
        for (k, disc) in discs.iter().enumerate() {
            let rule_u = gauss_rule(degree + 1, disc.space().kv_u())?;
            let rule_v = gauss_rule(degree + 1, disc.space().kv_v())?;
            let mut system = assemble_stiffness(disc, &domain.patches[k], &rule_u, &rule_v, k)?;
            let (f_i, f_g) = assemble_load(disc, &domain.patches[k], &rule_u, &rule_v, rhs)?;
            system.f_i = f_i;
            system.f_g = f_g;
            systems.push(system);
        }
        let assembly_s = watch.lap();
        Ok(Self {
            domain,
            degree,
            refinements,
            discs,
            systems,
            assembly_s,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.discs.iter().map(|d| d.n_total()).sum()
    }

    /// Builds the dual solver for one algorithm (patch systems are cloned
    /// into it; the discretization stays usable for energy checks).
    pub fn build_solver(&self, algorithm: Algorithm) -> Result<IetiSolver, IetiError> {
        let skeleton = build_skeleton_index(&self.domain, &self.discs)?;
        let jump = build_jump_matrix(&skeleton, algorithm);
        let constraints = build_primal_constraints(&self.domain, &self.discs, &skeleton, algorithm)?;
        let scaling = build_scaling(&jump);
        let mut patches = Vec::with_capacity(self.systems.len());
        for (k, system) in self.systems.iter().enumerate() {
            patches.push(PatchOperators::build(
                system.clone(),
                &constraints.per_patch[k],
                k,
            )?);
        }
        IetiSolver::assemble(skeleton, jump, constraints, patches, scaling)
    }

    /// Full dual-primal solve: build operators, run PCG on `F lambda = d`
    /// from a seeded random start with entries in `[-1, 1]`, recover the
    /// solution, and report iterations plus the Lanczos condition estimate.
    pub fn solve_ieti(
        &self,
        algorithm: Algorithm,
        config: SolveConfig,
    ) -> Result<(Solution, SolveReport), IetiError> {
        let mut watch = Stopwatch::start();
        let solver = self.build_solver(algorithm)?;
        let g = solver.g_concat();
        let w_unconstrained = solver.pipeline(&g);
        let mut d = vec![0.0; solver.n_multipliers()];
        solver.jump.apply(&w_unconstrained, &mut d);
        let factor_s = watch.lap();

        let n = solver.n_multipliers();
        // when the primal constraints already enforce every jump (d
        // vanishes up to roundoff), lambda = 0 is exact and F may be
        // singular-to-zero; skip the Krylov solve
        let d_norm: f64 = d.iter().map(|v| v * v).sum::<f64>();
        let w_norm: f64 = w_unconstrained.iter().map(|v| v * v).sum::<f64>();
        let degenerate = math::sqrt(d_norm) <= 1e-12 * (1.0 + math::sqrt(w_norm));
        let outcome: PcgOutcome = if n == 0 || degenerate {
            PcgOutcome {
                x: vec![0.0; n],
                iterations: 0,
                converged: true,
                residual_history: Vec::new(),
                lambda_min: 1.0,
                lambda_max: 1.0,
                kappa: 1.0,
            }
        } else {
            let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
            let x0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            pcg(
                &|x, y| solver.apply_f(x, y),
                &|x, y| solver.apply_msd(x, y),
                &d,
                &x0,
                config.rel_tol,
                config.max_iter,
            )?
        };
        let pcg_s = watch.lap();

        let per_patch = solver.recover(&outcome.x);
        let recovery_s = watch.lap();

        let report = SolveReport {
            algorithm,
            degree: self.degree,
            refinements: self.refinements,
            seed: config.seed,
            rng: "chacha12(seed_from_u64)",
            iterations: outcome.iterations,
            converged: outcome.converged,
            kappa: outcome.kappa,
            lambda_min: outcome.lambda_min,
            lambda_max: outcome.lambda_max,
            residual_history: outcome.residual_history,
            n_multipliers: n,
            n_primal: solver.n_primal(),
            n_dofs: self.n_dofs(),
            times: PhaseTimes {
                assembly_s: self.assembly_s,
                factor_s,
                pcg_s,
                recovery_s,
            },
        };
        Ok((Solution { per_patch }, report))
    }

    /// Kept-DOF to merged-global numbering: matched skeleton DOFs (and all
    /// corner DOFs meeting at a vertex) share one global unknown.
    pub fn merge_map(&self) -> Result<(Vec<Vec<usize>>, usize), IetiError> {
        let skeleton = build_skeleton_index(&self.domain, &self.discs)?;
        let mut kept_offsets = Vec::with_capacity(self.discs.len() + 1);
        kept_offsets.push(0usize);
        for disc in &self.discs {
            kept_offsets.push(kept_offsets.last().unwrap() + disc.n_total());
        }
        let total = *kept_offsets.last().unwrap();
        let mut parent: Vec<usize> = (0..total).collect();
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
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        // concatenated skeleton index -> kept instance index; patches with
        // empty skeleton ranges are skipped by the partition point
        let to_kept = |skel: usize, skeleton: &super::SkeletonIndex| -> usize {
            let k = skeleton.offsets.partition_point(|&o| o <= skel) - 1;
            let local = skel - skeleton.offsets[k];
            kept_offsets[k] + self.discs[k].n_interior() + local
        };
        for itf in &skeleton.interface_pairs {
            for pair in &itf.pairs {
                union(
                    &mut parent,
                    to_kept(pair.a, &skeleton),
                    to_kept(pair.b, &skeleton),
                );
            }
        }
        for corners in &skeleton.vertex_corners {
            if let Some((head, rest)) = corners.split_first() {
                for c in rest {
                    union(
                        &mut parent,
                        to_kept(head.skeleton, &skeleton),
                        to_kept(c.skeleton, &skeleton),
                    );
                }
            }
        }
        let mut global_of = vec![usize::MAX; total];
        let mut next = 0usize;
        for i in 0..total {
            let r = find(&mut parent, i);
            if global_of[r] == usize::MAX {
                global_of[r] = next;
                next += 1;
            }
            global_of[i] = global_of[r];
        }
        let mut maps = Vec::with_capacity(self.discs.len());
        for (k, disc) in self.discs.iter().enumerate() {
            maps.push(
                (0..disc.n_total())
                    .map(|i| global_of[kept_offsets[k] + i])
                    .collect(),
            );
        }
        Ok((maps, next))
    }

    /// Independent correctness oracle: merges matched skeleton DOFs into
    /// global unknowns, assembles the global SPD system, solves directly,
    /// and scatters back to per-patch coefficients.
    pub fn solve_oracle(&self) -> Result<Solution, IetiError> {
        let (maps, n_global) = self.merge_map()?;
        let mut tri = TripletBuffer::new(n_global, n_global);
        let mut rhs = vec![0.0; n_global];
        for (k, sys) in self.systems.iter().enumerate() {
            let map = &maps[k];
            let n_i = sys.n_interior();
            let scatter = |tri: &mut TripletBuffer,
                           block: &crate::linalg::SparseMatrix,
                           row_base: usize,
                           col_base: usize| {
                for r in 0..block.nrows() {
                    let (cols, vals) = block.row(r);
                    for idx in 0..cols.len() {
                        tri.push(map[row_base + r], map[col_base + cols[idx]], vals[idx]);
                    }
                }
            };
            scatter(&mut tri, &sys.a_ii, 0, 0);
            scatter(&mut tri, &sys.a_ig, 0, n_i);
            scatter(&mut tri, &sys.a_gi, n_i, 0);
            scatter(&mut tri, &sys.a_gg, n_i, n_i);
            for i in 0..n_i {
                rhs[map[i]] += sys.f_i[i];
            }
            for s in 0..sys.n_skeleton() {
                rhs[map[n_i + s]] += sys.f_g[s];
            }
        }
        let a = tri.compress();
        let factor = factor_spd(&a)?;
        let x = factor.solve(&rhs);
        let per_patch = maps
            .iter()
            .map(|map| map.iter().map(|&g| x[g]).collect())
            .collect();
        Ok(Solution { per_patch })
    }

    /// Total stiffness energy `sum_k u^(k)' A^(k) u^(k)`.
    pub fn energy(&self, solution: &Solution) -> f64 {
        let mut acc = 0.0;
        for (k, sys) in self.systems.iter().enumerate() {
            let coeffs = &solution.per_patch[k];
            let (interior, skeleton) = coeffs.split_at(sys.n_interior());
            acc += sys.energy(interior, skeleton);
        }
        acc
    }

    /// `<f, u>` summed over patches.
    pub fn load_product(&self, solution: &Solution) -> f64 {
        let mut acc = 0.0;
        for (k, sys) in self.systems.iter().enumerate() {
            let coeffs = &solution.per_patch[k];
            let (interior, skeleton) = coeffs.split_at(sys.n_interior());
            acc += sys.load_product(interior, skeleton);
        }
        acc
    }

    /// Relative energy-norm error `||a - b||_A / ||b||_A`.
    pub fn energy_error(&self, a: &Solution, b: &Solution) -> f64 {
        let diff = Solution {
            per_patch: a
                .per_patch
                .iter()
                .zip(&b.per_patch)
                .map(|(ca, cb)| ca.iter().zip(cb).map(|(x, y)| x - y).collect())
                .collect(),
        };
        math::sqrt(self.energy(&diff) / self.energy(b))
    }
}

/// Classifies all patches and reconciles the kept/dropped status across
/// interfaces: a trace DOF whose matched partner was eliminated by the
/// neighbor's Dirichlet side gets eliminated too (the conforming space
/// forces its coefficient to zero; this arises at reentrant boundary
/// vertices where a patch touches the boundary only in a point). Iterates
/// to a fixed point since dropping a corner DOF affects both adjacent
/// interfaces.
fn reconcile_discretizations(
    domain: &MultiPatchDomain,
    spaces: Vec<TensorSplineSpace>,
) -> Vec<PatchDiscretization> {
    let mut extra: Vec<Vec<usize>> = vec![Vec::new(); domain.num_patches()];
    loop {
        let discs: Vec<PatchDiscretization> = spaces
            .iter()
            .enumerate()
            .map(|(k, space)| {
                PatchDiscretization::with_extra_dropped(
                    space.clone(),
                    domain.dirichlet_sides_of(k),
                    &extra[k],
                )
            })
            .collect();
        let mut changed = false;
        for itf in &domain.interfaces {
            let dofs_a = discs[itf.patch_a].side_dofs(itf.side_a);
            let mut dofs_b = discs[itf.patch_b].side_dofs(itf.side_b);
            if itf.reversed {
                dofs_b.reverse();
            }
            if dofs_a.len() != dofs_b.len() {
                // dimension mismatch is reported later by the skeleton build
                continue;
            }
            for (da, db) in dofs_a.iter().zip(dofs_b.iter()) {
                match (da.kept, db.kept) {
                    (Some(_), None) => {
                        extra[itf.patch_a].push(da.tensor);
                        changed = true;
                    }
                    (None, Some(_)) => {
                        extra[itf.patch_b].push(db.tensor);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        if !changed {
            return discs;
        }
    }
}

/// One-call convenience wrapper: discretize and run the dual solve.
pub fn solve(
    domain: MultiPatchDomain,
    degree: usize,
    refinements: usize,
    algorithm: Algorithm,
    rel_tol: f64,
    seed: u64,
    rhs: &dyn Fn([f64; 2]) -> f64,
) -> Result<(Solution, SolveReport), IetiError> {
    let disc = Discretized::new(domain, degree, refinements, rhs)?;
    disc.solve_ieti(
        algorithm,
        SolveConfig {
            rel_tol,
            seed,
            ..SolveConfig::default()
        },
    )
}

/// One-call convenience wrapper for the global direct solve.
pub fn solve_global_oracle(
    domain: MultiPatchDomain,
    degree: usize,
    refinements: usize,
    rhs: &dyn Fn([f64; 2]) -> f64,
) -> Result<Solution, IetiError> {
    Discretized::new(domain, degree, refinements, rhs)?.solve_oracle()
}

/// The right side used throughout the experiments:
/// `f(x, y) = 2 pi^2 sin(pi x) sin(pi y)`.
pub fn benchmark_rhs(x: [f64; 2]) -> f64 {
    let pi = core::f64::consts::PI;
    2.0 * pi * pi * math::sin(pi * x[0]) * math::sin(pi * x[1])
}
