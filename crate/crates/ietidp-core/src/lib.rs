//! Dual-primal tearing and interconnecting (IETI-DP) solver for the 2D
//! Poisson problem on multi-patch spline domains.
//!
//! The crate is organized bottom-up:
//!
//! * [`splines`] — univariate B-spline knot vectors, Cox-de Boor evaluation,
//!   derivatives, uniform refinement and tensor-product bookkeeping,
//! * [`geometry`] — NURBS geometry maps, multi-patch topology (interfaces,
//!   vertices, Dirichlet sides) and the built-in benchmark domains,
//! * [`assembly`] — Gauss quadrature and patch-local Galerkin assembly of the
//!   Poisson stiffness matrix and load vector,
//! * [`linalg`] — sparse symmetric storage, direct factorizations, a
//!   preconditioned conjugate gradient solver with a Lanczos condition-number
//!   estimate,
//! * [`ietidp`] — the dual-primal solver itself (jump matrix, primal
//!   constraints, energy-minimizing coarse basis, scaled Dirichlet
//!   preconditioner) together with an independently assembled global direct
//!   solve used as a correctness oracle.
//!
//! The crate is `no_std`-compatible (requires `alloc`); enable the `libm`
//! feature when building without `std`.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod assembly;
pub mod geometry;
pub mod ietidp;
pub mod linalg;
mod math;
pub mod splines;

pub use geometry::{MultiPatchDomain, NurbsPatchMap, SideId};
pub use ietidp::{Algorithm, Discretized, Solution, SolveReport};
pub use splines::{KnotVector, TensorSplineSpace};
