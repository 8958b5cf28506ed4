//! The dual-primal tearing and interconnecting solver.
//!
//! The pieces follow the usual pipeline: matched skeleton indexing across
//! interfaces, the signed jump matrix `B`, primal constraint matrices
//! `C^(k)` (vertex values, edge averages, or both), the energy-minimizing
//! primal basis `Psi` with the coarse matrix `S_Pi`, the dual operator `F`
//! and the scaled Dirichlet preconditioner `M_sD`, and finally a PCG run on
//! `F lambda = d` with solution recovery. A globally assembled direct solve
//! serves as an independent correctness oracle.

mod jump;
mod operators;
mod primal;
mod skeleton;
mod solve;

pub use jump::{build_jump_matrix, build_scaling, JumpMatrix, Scaling};
pub use operators::{IetiSolver, PatchOperators, SchurOperator};
pub use primal::{build_primal_constraints, CRow, PrimalConstraints};
pub use skeleton::{build_skeleton_index, InterfacePairs, MatchedPair, SkeletonIndex, VertexCorner};
pub use solve::{
    benchmark_rhs, solve, solve_global_oracle, Discretized, PhaseTimes, Solution, SolveConfig,
    SolveReport,
};

use alloc::string::String;

use crate::assembly::AssemblyError;
use crate::geometry::GeometryError;
use crate::linalg::LinalgError;

/// Choice of primal degrees of freedom: vertex values (A), edge averages
/// (B), or both (C).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    A,
    B,
    C,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::A, Algorithm::B, Algorithm::C];

    pub fn vertex_primal(self) -> bool {
        matches!(self, Algorithm::A | Algorithm::C)
    }

    pub fn edge_primal(self) -> bool {
        matches!(self, Algorithm::B | Algorithm::C)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::A => "A",
            Algorithm::B => "B",
            Algorithm::C => "C",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        match s {
            "A" | "a" => Some(Algorithm::A),
            "B" | "b" => Some(Algorithm::B),
            "C" | "c" => Some(Algorithm::C),
            _ => None,
        }
    }
}

impl core::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IetiError {
    #[error(transparent)]
    Spline(#[from] crate::splines::SplineError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("patch {patch}: {source}")]
    PatchLinalg { patch: usize, source: LinalgError },
    #[error("interface {interface} is not fully matching: {reason}")]
    Matching { interface: usize, reason: String },
    #[error("patch {patch} has no Dirichlet side and no primal constraint")]
    FloatingPatchWithoutPrimal { patch: usize },
    #[error("patch {patch}: saddle system [S C'; C 0] is singular")]
    SingularSaddle { patch: usize },
    #[error("coarse problem S_Pi is singular: {0}")]
    SingularCoarse(LinalgError),
}
